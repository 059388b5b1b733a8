//! Decoherence of macroscopic quantum superpositions of light in truncated
//! Fock space: coherent-state cats and amplified single-photon macrostates,
//! a beam-splitter loss channel, Bures distances and the orthogonality
//! filter.

// `!(x > tol)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fock;
pub mod generators;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod ofilter;

pub use error::{Error, Result};
pub use experiments::{CurvePoint, SweepConfig};
pub use fock::{
    mean_photon_number, normalize, number_distribution, polarization_rotation, tensor_product, ModeBasis, Normalize,
    PhotonDistribution, PhotonStatistics, SingleModeDensity, SingleModePureState, StateRecord, TensorProduct,
    TruncationPolicy, TwoModeDensity, TwoModePureState,
};
pub use generators::{CatParams, GainSetting, Pole, Sign};
pub use linalg::{CMatrix, C64};
pub use loss::LossSetting;
pub use metrics::{bures_distance, fidelity, VisibilityResult};
pub use ofilter::FilterThreshold;
