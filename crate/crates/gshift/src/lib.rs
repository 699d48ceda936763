//! Generalized shift operator, generalized modulus of smoothness, and
//! weighted best polynomial approximation on [-1, 1].
//!
//! The crate builds the machinery to measure, for functions in the
//! weighted spaces L_{p,alpha}, how fast best polynomial approximation
//! errors E_n decay and how fast the shift-based modulus of smoothness
//! omega(f, delta) shrinks, and to check empirically that the two decay
//! exponents agree (the direct/inverse/coincidence circle of results in
//! weighted approximation theory).
//!
//! Module map:
//! - [`polybasis`]: normalized Jacobi polynomials and Gauss rules,
//! - [`space`]: weighted norms, admissibility regions, the test corpus,
//! - [`shift`]: the shift operator, its kernel, the self-test gate,
//! - [`modulus`]: the modulus of smoothness over a delta grid,
//! - [`approx`]: best approximation by Chebyshev-basis polynomials,
//! - [`analysis`]: Fourier-Jacobi coefficients, rate fits, theorem checks,
//! - [`kvfile`]: the flat key-value configuration format.
//!
//! All numerics are generic over the scalar (see [`Real`]); the aliases
//! below pin the `f64` instantiations that the command-line tool and the
//! test suites use.

pub mod analysis;
pub mod approx;
mod error;
pub mod kvfile;
pub mod modulus;
mod optim;
mod panelquad;
pub mod polybasis;
mod real;
pub mod shift;
pub mod space;

pub use error::{Error, Result};
pub use real::Real;

/// Node and sample counts used by the quadratures and samplers. Operator
/// integrals default to 256 nodes and norm integrals to 512; the sup-norm
/// sampler defaults to 4097 Chebyshev-distributed points. Consumers that
/// need tighter output double these until their own tolerance is met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Resolution {
    /// Quadrature nodes for one application of the shift operator.
    pub shift_nodes: usize,
    /// Total nodes for a finite-p norm integral.
    pub norm_nodes: usize,
    /// Sample count for the sup-norm grid.
    pub sup_samples: usize,
    /// Total nodes for a Fourier-Jacobi coefficient integral.
    pub fj_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            shift_nodes: 256,
            norm_nodes: 512,
            sup_samples: 4097,
            fj_nodes: 512,
        }
    }
}

impl Resolution {
    /// Every count doubled; sample grids keep odd length.
    pub fn doubled(&self) -> Self {
        Self {
            shift_nodes: self.shift_nodes * 2,
            norm_nodes: self.norm_nodes * 2,
            sup_samples: self.sup_samples * 2 | 1,
            fj_nodes: self.fj_nodes * 2,
        }
    }

    /// Every count multiplied by `k` (k >= 1); sample grids keep odd length.
    pub fn scaled(&self, k: usize) -> Self {
        let k = k.max(1);
        Self {
            shift_nodes: self.shift_nodes * k,
            norm_nodes: self.norm_nodes * k,
            sup_samples: self.sup_samples * k | 1,
            fj_nodes: self.fj_nodes * k,
        }
    }
}

pub type JacobiIndex64 = polybasis::JacobiIndex<f64>;
pub type QuadratureRule64 = polybasis::QuadratureRule<f64>;
pub type WeightParams64 = space::WeightParams<f64>;
pub type SigmaWeight64 = space::SigmaWeight<f64>;
pub type FunctionHandle64 = space::FunctionHandle<f64>;
pub type KernelSpec64 = shift::KernelSpec<f64>;
pub type ShiftEvaluator64 = shift::ShiftEvaluator<f64>;
pub type SelfTestReport64 = shift::SelfTestReport<f64>;
pub type ModulusCurve64 = modulus::ModulusCurve<f64>;
pub type PolyCoeffs64 = approx::PolyCoeffs<f64>;
pub type ErrorSequence64 = approx::ErrorSequence<f64>;
pub type RateEstimate64 = analysis::RateEstimate<f64>;
pub type FunctionCurves64 = analysis::FunctionCurves<f64>;
