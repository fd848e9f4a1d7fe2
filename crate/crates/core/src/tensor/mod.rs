//! Frame-level tensor algebra: adapted frames, second fundamental form
//! invariants, reaction terms and the Codazzi reconstruction of `nabla h`.

pub mod codazzi;
pub mod frame;
pub mod reaction;
pub mod sff;
pub mod skew;

pub use codazzi::{
    codazzi_complete, gradient_inequality_slack, gradient_lower_bound, symmetrization_slack,
    GradientSff, SymmetricTensor,
};
pub use frame::{build_adapted_frame, AdaptedFrame, ComplexStructure};
pub use reaction::{r3_term, reaction_terms, reaction_terms_compensated, s1_full_form_variant, ReactionTerms};
pub use sff::{align_mean_curvature, sff_invariants, Sff, SffInvariants};
pub use skew::{skew_normal_form, SkewNormalForm};
