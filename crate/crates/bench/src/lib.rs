//! Fixed inputs shared by the criterion benches.

use octagon_core::scalar::rat;
use octagon_core::{CanonCoords, Rat};

pub fn exact_point() -> CanonCoords<Rat> {
    CanonCoords::new(rat(3, 2), rat(1, 2), rat(5, 4), rat(1, 3))
}

pub fn convex_point() -> CanonCoords<f64> {
    CanonCoords::new(0.9, 0.8, 0.9, 0.8)
}
