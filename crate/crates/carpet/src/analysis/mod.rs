//! Metric-measure probes: Ahlfors bands, discrete modulus, curve families,
//! the modulus monotonicity probe and the strong-A-infinity raster metric.

pub mod ahlfors;
pub mod ainfty;
pub mod curves;
pub mod modulus;
pub mod probe;

pub use ahlfors::{ahlfors_check, profile_gauge, AhlforsReport, RadiusBand};
pub use ainfty::{euclidean_band, pullback_band, strong_ainfty_metric, AinftyField, Raster, AMBIENT_DIMENSION};
pub use curves::curve_family_between;
pub use modulus::{modulus, modulus_p2_exact, CurveFamily, ModulusProblem, ModulusResult, MODULUS_MAX_SWEEPS, MODULUS_TOLERANCE};
pub use probe::{monotonicity_probe, ProbeRow};
