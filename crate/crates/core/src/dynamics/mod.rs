//! Dynamics analysis of the nine-dimensional system: Lyapunov spectrum,
//! bifurcation scans, the 0-1 test, and spectral complexity.

pub mod bifurcation;
pub mod complexity;
pub mod lyapunov;
pub mod zero_one;

pub use bifurcation::{
    bifurcation_scan, linspace, local_maxima, BifurcationColumn, BifurcationData, ParamName,
    ScanConfig,
};
pub use complexity::{
    c0_complexity, c0_complexity_with, cell_sequence, complexity_grid, spectral_entropy,
    ComplexityGrid, FftScalar, GridConfig,
};
pub use lyapunov::{lyapunov_spectrum, LyapunovConfig, LyapunovSpectrum, TracePoint};
pub use zero_one::{translation, zero_one_test, ZeroOneResult, SAMPLE_STRIDE};
