//! Pinching functions, the preserved threshold `W`, case classification and
//! the grid verification of their inequalities.

pub mod appendix;
pub mod phi;
pub mod psi;
pub mod threshold;

pub use appendix::{verify_appendix, AppendixConfig, AppendixReport, GridSpec};
pub use phi::PhiParams;
pub use psi::PsiParams;
pub use threshold::{case_tag, classify_and_check, f_sigma, CaseTag, PinchingCase, PinchingReport, Verdict};
