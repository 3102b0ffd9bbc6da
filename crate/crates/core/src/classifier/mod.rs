//! Genus-one classification of reversible and Lotka-Volterra centers.

pub mod diophantine;
pub mod lotka_volterra;
pub mod reversible;

pub use diophantine::{solve_genus_diophantine, DiophantineSolution};
pub use lotka_volterra::{
    classify_lv, classify_lv_exact, lv_inversion, lv_normalize, GaussRat, LVCase, LVExponents, LVParams,
};
pub use reversible::{
    classify_record, classify_reversible, classify_reversible_f64, first_integral_form, genus_from_signature,
    ClassificationRecord, ClassifyError, FirstIntegralForm, Genus, GenusSignature, ReversibleCase,
    ReversibleParams,
};
