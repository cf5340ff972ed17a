//! Homogeneous cones built from finite posets, with the Riesz measures and
//! natural exponential families living on them.
//!
//! The pipeline: a poset and block dimensions define an algebra of
//! poset-patterned "matrices"; the cone is the image of the positive
//! triangular group under T ↦ TT*; generalized power functions, gamma
//! integrals, Gindikin classification, samplers and the exponential-family
//! layer (cumulant, mean map, variance) are built on the factorization.

pub mod algebra;
pub mod axioms;
pub mod dims;
pub mod error;
pub mod gindikin;
pub mod nef;
pub mod poset;
pub mod power;
pub mod report;
pub mod riesz;
pub mod special;
pub mod triangular;

pub use algebra::{Algebra, Element, GeneralStructure, StructureConstants};
pub use axioms::{axiom_check, AxiomReport, AxiomResult};
pub use dims::DimensionSystem;
pub use error::{Error, Result};
pub use gindikin::{classify_measure, enumerate_signatures, is_absolutely_continuous,
    witness_for_tuple, xi_component_check, xi_membership, MeasureClass, MeasureClassification,
    SignatureFamily, XiComponent, XiWitness};
pub use nef::{inverse_derivative, quadratic_rep, quadratic_rep_operator, Family, SymmetricOperator};
pub use poset::{order_sets, structure_sets, OrderProfile, Poset, StructureSets};
pub use power::{
    anchor_components, gamma_cone, gamma_orbit, gen_power, gen_power_orbit, gen_power_upset,
    ln_gamma_cone, ln_gamma_orbit, ln_gen_power, minors, n_profile, ExponentProfile, MinorTable,
    Multiplier,
};
pub use report::{Report, ReportRow};
pub use riesz::{density_ac, draw_rng, laplace_closed, ln_laplace_closed, mc_laplace,
    sample_orbit_component, sample_riesz, sample_riesz_with_witness, sample_standard_ac};
pub use triangular::{LowerTriangular, OrbitSignature};
