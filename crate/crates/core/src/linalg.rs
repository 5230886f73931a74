//! Dense linear algebra over `F_p` for the small systems used by the
//! classifiers.

use crate::field::FieldParams;

/// Row-major matrix over `F_p`.
pub type Mat = Vec<Vec<u32>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(f: FieldParams, m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = f.inv(m[r][c]).expect("non-zero pivot");
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let factor = row[c];
                for (x, &v) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(factor, v));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : M x = 0}` for an `r × cols` matrix.
pub fn nullspace(f: FieldParams, m: &Mat, cols: usize) -> Vec<Vec<u32>> {
    let mut a = m.clone();
    let pivots = rref(f, &mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u32; cols];
            v[fc] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(a[row][fc]);
            }
            v
        })
        .collect()
}

pub fn mat_vec(f: FieldParams, m: &Mat, v: &[u32]) -> Vec<u32> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
        .collect()
}

/// Determinant by elimination.
pub fn det(f: FieldParams, m: &Mat) -> u32 {
    let n = m.len();
    let mut a = m.clone();
    let mut d = 1u32;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| a[i][c] != 0) else {
            return 0;
        };
        if piv != c {
            a.swap(piv, c);
            d = f.neg(d);
        }
        d = f.mul(d, a[c][c]);
        let inv = f.inv(a[c][c]).expect("non-zero pivot");
        let (top, rest) = a.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in rest {
            let factor = f.mul(row[c], inv);
            if factor != 0 {
                for (x, &v) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x = f.sub(*x, f.mul(factor, v));
                }
            }
        }
    }
    d
}

/// Intersection of the span of `basis` (vectors of length `n`) with the
/// kernel of `m`.
pub fn intersect_kernel(f: FieldParams, basis: &[Vec<u32>], m: &Mat) -> Vec<Vec<u32>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = basis[0].len();
    let d = basis.len();
    // (M B) c = 0, where B has the basis vectors as columns.
    let images: Vec<Vec<u32>> = basis.iter().map(|b| mat_vec(f, m, b)).collect();
    let mb: Mat = (0..m.len()).map(|i| (0..d).map(|k| images[k][i]).collect()).collect();
    nullspace(f, &mb, d)
        .into_iter()
        .map(|c| {
            (0..n)
                .map(|i| (0..d).fold(0, |acc, k| f.add(acc, f.mul(c[k], basis[k][i]))))
                .collect()
        })
        .collect()
}
