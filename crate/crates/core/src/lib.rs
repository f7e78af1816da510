//! Dirac point-masses in discrete reproducing kernel Hilbert spaces.
//!
//! Given a positive-definite kernel `k` on a countable set `V`, the point
//! mass `δ_x` belongs to the RKHS exactly when the projection norms
//! `(K_F⁻¹ δ_x)(x)` stay bounded as the finite set `F ∋ x` grows. This crate
//! computes those norms ([`gram`]), traces them along filtrations and
//! classifies the evidence ([`diagnostics`]), and implements the concrete
//! models where they have closed forms:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`builtin`] | Brownian motion `min(s, t)` and bridge `min(s, t) - st` kernels |
//! | [`binomial`] | Binomial kernel and exact Pascal-matrix factorization |
//! | [`network`] | Graph Laplacian, dipoles, Green's kernel, resistance metric |
//! | [`gff`] | Seeded Gaussian free field sampling |
//! | [`tree`] | Dyadic trees with summable level resistances |
//!
//! ```
//! use pointmass::{assemble_gram, BrownianKernel, Point, PointSet};
//!
//! let points = PointSet::reals(&[1.0, 2.0, 3.0]).unwrap();
//! let gram = assemble_gram(&BrownianKernel, &points).unwrap();
//! // x₂ / (x₁ (x₂ - x₁)) = 2
//! let norm = gram.projection_norm_sq(&Point::Real(1.0)).unwrap();
//! assert!((norm - 2.0).abs() < 1e-12);
//! ```

pub mod binomial;
pub mod builtin;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod gff;
pub mod gram;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod network;
pub mod point;
pub mod tree;

pub use binomial::{
    binomial_basis_eval, binomial_eval, binomial_partial_norm, pascal_factorization,
    BinomialKernel, PascalMatrix,
};
pub use builtin::{
    bm_delta_norm_sq, bm_det, bm_log_det, bridge_delta_norm_sq, bridge_det, bridge_log_det,
    BridgeKernel, BrownianKernel,
};
pub use diagnostics::{
    classify, det_ratio_trace, trace, ClassifyConfig, Filtration, FiltrationTrace, Membership,
    Verdict,
};
pub use error::{Error, Result};
pub use gram::{assemble_gram, CoefficientRole, CoefficientVector, GramMatrix};
pub use kernel::{Domain, Kernel, TableKernel};
pub use linalg::Definiteness;
pub use network::{green_kernel, Dipole, EnergyFunction, GreenKernel, Network};
pub use point::{Point, PointSet};
