//! Basins of attraction, infinite-product kernels and Cuntz-operator bases
//! for the polynomial family `R_a(z) = a z^(2^(n+2)) - 2a z^(2^(n+1))`.
//!
//! * [`poly`]: exact arithmetic in `Z[a][z]` and numeric specialization.
//! * [`family`] and [`dynamics`]: iteration, basin tests, preimages, rendering.
//! * [`kernel`]: the kernel `K_a(z, w) = prod_i (1 + (R^i(z) conj R^i(w))^(2^n))`.
//! * [`cuntz`]: the operators `S_0 f = f∘R`, `S_1 f = z^(2^n) f∘R` and the
//!   basis vectors `b_v = S_v 1`.
//! * [`verify`]: executable checks aggregated into reports.

pub mod cuntz;
pub mod dynamics;
pub mod error;
pub mod family;
pub mod kernel;
pub mod par;
pub mod poly;
pub mod raster;
pub mod verify;

pub use error::{Error, Result};
pub use family::{FamilyIndex, FamilyMember};
pub use num_complex::Complex64;
pub use par::Exec;
