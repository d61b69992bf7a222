//! Mather's destruction construction: the bump `Ψ`, the perturbation
//! pieces `u`, `v`, `w`, and the perturbed generating functions.

mod bump;
mod perturbed;
mod plan;
mod psi;

pub use bump::{
    certify_single, certify_u, certify_w, middle_third, u_bump, v_bump, w_bump, BumpCertificate, BumpShape, BumpSpec,
    SmoothBump,
};
pub use perturbed::{perturbed_genfun, product_cr_norm, PerturbedGenFun, ProductTerm};
pub use plan::{
    plan, plan_destruction, NormReport, PerturbationPlan, PlanRequest, RationalChoice, SupportBounds, SupportBox,
    MANIFEST_VERSION,
};
pub use psi::{c0, c1, c2, psi, psi_derivative, psi_derivative_max, MAX_R};
