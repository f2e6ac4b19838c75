//! Generalized sampling and reconstruction in tensor products of
//! unitary-invariant subspaces.
//!
//! A signal lives in `A_a ⊗ A_b`, the span of `U^n a ⊗ V^p b`, and is
//! observed through `s·s'` separable channels
//! `x ↦ ⟨x, U^{rn} h_j ⊗ V^{r̄m} h'_{j'}⟩`. Each factor is either
//! *continuous* (a Riesz sequence `{U^n a}_{n∈ℤ}`, analysed through its
//! symbol matrix `G(x)`) or *periodic* (`V^N b = b`, analysed through the
//! cross-covariance matrix `R`). The crate builds both factor analyses,
//! designs dual frames from the pseudo-inverse families, and samples and
//! reconstructs coefficient arrays in all three case combinations.
//!
//! The numerical core is generic over the real scalar type (see
//! [`Real`]); the `*64` aliases below fix `f64`, the precision used by the
//! scenario layer.

pub mod continuous;
pub mod error;
pub mod linalg;
pub mod periodic;
pub mod random;
pub mod scalar;
pub mod scenario;
pub mod sequence;
pub mod tensor;

pub use continuous::{ContinuousScheme, DualSymbols, FourierSymbol, FrameConstants};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SpectralExtremes};
pub use periodic::{FiniteUnitaryModel, PeriodicScheme, PeriodicSequence};
pub use scalar::{wrap, Real};
pub use sequence::{IndexRange, Sequence};
pub use tensor::{Case, Factor, ReconstructionKit, SampleGrid, TensorCoefficients, TensorScheme};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type SpectralExtremes64 = SpectralExtremes<f64>;
pub type PeriodicScheme64 = PeriodicScheme<f64>;
pub type PeriodicSequence64 = PeriodicSequence<f64>;
pub type FiniteUnitaryModel64 = FiniteUnitaryModel<f64>;
pub type ContinuousScheme64 = ContinuousScheme<f64>;
pub type FourierSymbol64 = FourierSymbol<f64>;
pub type Sequence64 = Sequence<f64>;
pub type TensorScheme64 = TensorScheme<f64>;
pub type TensorCoefficients64 = TensorCoefficients<f64>;
pub type SampleGrid64 = SampleGrid<f64>;
pub type ReconstructionKit64 = ReconstructionKit<f64>;
