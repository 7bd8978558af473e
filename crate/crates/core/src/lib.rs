//! Chaos-based cryptography toolkit built on a nine-dimensional quaternion
//! extension of the complex Chen system.
//!
//! - [`system`]: the vector field, its Jacobian, RK4 integration.
//! - [`dynamics`]: Lyapunov spectrum, bifurcation, 0-1 test, SE/C0 complexity.
//! - [`keystream`]: keys, chaotic sequences, quantizers, permutations.
//! - [`dna`] and [`cipher`]: the DNA-coding image cipher.
//! - [`modbus`]: Modbus RTU frames with chaotically encrypted CRC.
//! - [`metrics`] and [`nist`]: the statistical bench.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the cipher uses.

// `!(x > 0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cipher;
pub mod dna;
pub mod dynamics;
pub mod error;
pub mod image_io;
pub mod keystream;
pub mod linalg;
pub mod metrics;
pub mod modbus;
pub mod nist;
pub mod raster;
pub mod scalar;
pub mod system;
pub mod testimage;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type State9 = system::State<f64>;
pub type State9f32 = system::State<f32>;
pub type SystemParams = system::SystemParams<f64>;
pub type SystemParamsf32 = system::SystemParams<f32>;
pub type Trajectory = system::Trajectory<f64>;
pub type Matrix9 = linalg::Matrix9<f64>;
pub type LyapunovSpectrum = dynamics::LyapunovSpectrum<f64>;
pub type ZeroOneResult = dynamics::ZeroOneResult<f64>;
pub type ComplexityGrid = dynamics::ComplexityGrid<f64>;
pub type BifurcationData = dynamics::BifurcationData<f64>;
