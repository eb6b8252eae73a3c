//! Moduli of continuity, the Ω/Υ functionals and the negativity certificate
//! `Ω(ξ)ω'(ξ) + Υ(ξ) < 0`.

mod certify;
mod empirical;
mod functionals;
mod modulus;

pub use certify::{
    admissible_params, case_hypotheses, certification_grid, certify_negativity, CaseConstants,
    CertificationReport, Hypothesis, Verdict, XiRange,
};
pub use empirical::{check_obeys, empirical_moc, EmpiricalMoc};
pub(crate) use certify::kind_for;
pub(crate) use empirical::worst_pair;
pub use functionals::{
    omega_functional, omega_functional_tol, upsilon_functional, upsilon_functional_tol, Estimate,
    DEFAULT_REL_TOL,
};
pub use modulus::{
    lambda_value, smallness_c0, ConcaveModulus, Derivative, LinearModulus, MocKind, ModulusOfContinuity,
};
