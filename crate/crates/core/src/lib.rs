//! Exact growth experiments in `SL_2(F_p)` and `SL_3(F_p)`: product sets,
//! Cayley balls and diameters, torus and conjugacy statistics, sum-product
//! inequalities, escape from subvarieties and subgroup structure.

pub mod cayley;
pub mod check;
pub mod codeset;
pub mod element;
pub mod error;
pub mod escape;
pub mod families;
pub mod field;
pub mod linalg;
pub mod poly;
pub mod sample;
pub mod setgrowth;
pub mod structure;
pub mod sumprod;
pub mod torus;

pub use check::{CheckRecord, Outcome};
pub use element::{CanonCode, GroupElement, Kappa};
pub use error::{Error, Result};
pub use families::FamilySpec;
pub use field::FieldParams;
pub use sample::{Sampler, RNG_ALGORITHM};
pub use setgrowth::{BallProfile, ElementSet, GrowthReport};
pub use structure::{ClassificationFlags, UnipotentType};
