//! Discrete metric measure spaces with the operators, norms and checks needed
//! to test pointwise and functional inequalities for rough singular integrals
//! and Riesz-type potentials.
//!
//! A [`Space`] is a finite point set with a distance matrix and positive
//! weights. Balls are open and every radius-dependent supremum runs over the
//! finitely many realizable balls, found through the distance shells around
//! each center.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ahlfors;
pub mod error;
pub mod field;
pub mod kernel;
pub mod norms;
pub mod operators;
pub mod poincare;
pub mod random;
pub mod space;
mod sum;
pub mod verify;

pub use ahlfors::{
    certify_ahlfors, check_doubling, theorem1_condition, AhlforsCertificate, CenterSelection,
    ConditionStatus, DoublingReport,
};
pub use error::{Error, Result};
pub use field::ScalarField;
pub use kernel::{build_rough_kernel, verify_kernel, AngularPattern, KernelAudit, RoughKernelMatrix};
pub use norms::{LorentzIndex, NormSpec, YoungFunction, YoungShape};
pub use operators::{
    graph_upper_gradient, integrate, maximal_function, maximal_singular, riesz_potential,
    truncated_singular, verify_upper_gradient, BallMassMode,
};
pub use poincare::{estimate_poincare_constant, PoincareEstimate, PoincareParams};
pub use random::FieldDistribution;
pub use space::{Ball, Metric, Space, SpaceDocument, WeightMode};
pub use sum::{pairwise_sum, pairwise_sum_by};
pub use verify::{
    check_functional, check_hedberg_split, check_pointwise_theorem, maximal_boundedness, sharpness_search,
    CheckContext, FunctionalCase, HedbergParams, InequalityId, InequalityReport, PointwiseParams, Theorem,
};
