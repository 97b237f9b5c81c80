//! Small numerical building blocks shared across the crate.

pub mod fft;
pub mod lm;
pub mod mat2;
pub mod quad;
pub mod rk;
pub mod roots;
