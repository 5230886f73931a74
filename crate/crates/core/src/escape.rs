//! Bounded search for short words moving a point off a variety.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::poly::Variety;
use crate::setgrowth::{default_cap, ElementSet, Expansion};

pub const DEFAULT_MAX_RADIUS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Escape {
    /// Least element (in canonical order) of the first successful layer.
    pub witness: GroupElement,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeSummary {
    pub witness: Vec<u32>,
    pub radius: usize,
}

impl Escape {
    pub fn summary(&self) -> EscapeSummary {
        EscapeSummary {
            witness: self.witness.entries().to_vec(),
            radius: self.radius,
        }
    }
}

/// Find `g ∈ A_m`, `m ≤ max_radius`, with `g·x ∉ V`. Layers of the ball are
/// scanned in order of radius; the witness is the least qualifying element
/// of the first layer that has one.
pub fn escape(a: &ElementSet, v: &Variety, x: &GroupElement, max_radius: usize) -> Result<Escape> {
    if a.params() != x.params() {
        let (f, g) = (a.params(), x.params());
        return Err(Error::ParamsMismatch(f.n(), f.p(), g.n(), g.p()));
    }
    let mut walk = Expansion::symmetric(a, 0, default_cap());
    let mut radius = 0;
    loop {
        let layer = walk.frontier();
        let hits: Vec<Result<bool>> = layer
            .par_iter()
            .map(|g| v.contains(&g.mul_unchecked(x)).map(|inside| !inside))
            .collect();
        for (g, hit) in layer.iter().zip(hits) {
            if hit? {
                return Ok(Escape { witness: *g, radius });
            }
        }
        if radius == max_radius || !walk.step()? {
            return Err(Error::Exhausted { radius });
        }
        radius += 1;
    }
}

pub const ANCHOR_ESCAPE: &str = "<A> = G implies h·g0 regular semisimple for some h in A_m, m <= radius";

/// `h ∈ A_m` with `h·g0` regular semisimple.
pub fn escape_regss(a: &ElementSet, g0: &GroupElement, max_radius: usize) -> Result<Escape> {
    let found = escape(a, &Variety::discriminant(a.params()), g0, max_radius)?;
    debug_assert!(found.witness.mul_unchecked(g0).is_regular_semisimple());
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::standard_generators;
    use crate::field::FieldParams;
    use crate::poly::PolySparse;
    use crate::sample::Sampler;

    fn sl(n: u8, p: u32) -> FieldParams {
        FieldParams::new(n, p).unwrap()
    }

    #[test]
    fn point_already_outside() {
        let f = sl(3, 7);
        let a = standard_generators(f);
        let t = GroupElement::diag(f, &[1, 2, 4]).unwrap();
        let e = escape_regss(&a, &t, 5).unwrap();
        assert_eq!((e.witness, e.radius), (GroupElement::identity(f), 0));
        let e = escape(&a, &Variety::empty(f), &GroupElement::identity(f), 5).unwrap();
        assert_eq!(e.radius, 0);
    }

    #[test]
    fn single_regular_generator() {
        let f = sl(3, 7);
        let t = GroupElement::diag(f, &[1, 2, 4]).unwrap();
        let a = ElementSet::from_elements(f, [t]);
        let e = escape_regss(&a, &GroupElement::identity(f), 3).unwrap();
        assert_eq!(e.radius, 1);
        let first = [t, t.inv()].into_iter().min_by_key(|g| g.encode()).unwrap();
        assert_eq!(e.witness, first);
    }

    #[test]
    fn standard_generators_escape_discriminant() {
        let f = sl(3, 7);
        let a = standard_generators(f);
        let id = GroupElement::identity(f);
        let e = escape_regss(&a, &id, DEFAULT_MAX_RADIUS).unwrap();
        assert!(e.witness.is_regular_semisimple());
        // Oracle: scan the ball layer by layer by brute force.
        let mut prev = ElementSet::identity(f);
        let mut expected = None;
        for r in 1..=DEFAULT_MAX_RADIUS {
            let ball = crate::setgrowth::ball_set(&a, r).unwrap();
            let layer: Vec<GroupElement> = ball.iter().filter(|g| !prev.contains(g)).collect();
            if let Some(g) = layer.iter().filter(|g| g.discriminant() != 0).min_by_key(|g| g.encode()) {
                expected = Some((*g, r));
                break;
            }
            prev = ball;
        }
        let (g, r) = expected.unwrap();
        assert_eq!((e.witness, e.radius), (g, r));
        assert_eq!(r, 2);
        assert_eq!(escape_regss(&a, &id, DEFAULT_MAX_RADIUS).unwrap(), e);
    }

    #[test]
    fn orbit_inside_variety_is_exhausted() {
        let f = sl(2, 7);
        // Upper unitriangular generators fix e1, so the (1,0) entry of g·I
        // stays zero on the whole orbit.
        let a = ElementSet::from_elements(f, [GroupElement::elementary(f, 0, 1, 1)]);
        let v = Variety::new(vec![PolySparse::var(7, 4, 2)]);
        assert!(matches!(
            escape(&a, &v, &GroupElement::identity(f), 20),
            Err(Error::Exhausted { .. })
        ));
        assert!(matches!(
            escape(&standard_generators(f), &Variety::new(vec![PolySparse::zero(7, 4)]), &GroupElement::identity(f), 3),
            Err(Error::Exhausted { radius: 3 })
        ));
    }

    #[test]
    fn witnesses_leave_the_variety() {
        let f = sl(3, 7);
        let mut s = Sampler::new(41);
        let v = Variety::discriminant(f);
        for _ in 0..20 {
            let a = s.random_set(f, 2);
            let x = s.random_unipotent_upper(f);
            let e = escape(&a, &v, &x, DEFAULT_MAX_RADIUS).unwrap();
            assert!(!v.contains(&(e.witness * x)).unwrap());
        }
    }
}
