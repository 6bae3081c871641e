//! Numerical building blocks shared by the geometry modules.

pub mod cfrac;
pub mod parallel;
pub mod quad;
pub mod roots;
pub mod spline;
pub mod sum;
