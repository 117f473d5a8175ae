//! Numerical laboratory for Turán-type reverse Markov–Nikol'skii inequalities.
//!
//! Polynomials are held in monic root form ([`RootPoly`]) and every quantity
//! that appears in the inequalities is computed directly from the zeros:
//! weighted `L_p[-1,1]` and sup norms ([`norms`]), the closed-form constants
//! ([`constants`]), the structured and random families ([`families`]), one
//! checker per inequality ([`inequalities`]), the sublevel-set measure
//! machinery behind the Nikol'skii-type lemma ([`measure`]) and an extremal
//! search over root configurations ([`extremal`]).

pub mod constants;
pub mod error;
pub mod extremal;
pub mod families;
pub mod inequalities;
pub mod measure;
pub mod norms;
pub mod polycore;
pub mod quadrature;
pub mod serde_float;

pub use constants::{beta, eval_constant, ConstantName, ConstantParams};
pub use error::{Error, Result};
pub use extremal::{minimize_ratio, SearchConfig, SearchResult};
pub use families::{generate, FamilyKind, FamilySpec};
pub use inequalities::{check, InequalityId, InequalityReport, Params};
pub use measure::MeasureEstimate;
pub use norms::{norm, NormSpec, NormValue, Weight};
pub use polycore::{make_root_poly, EvalResult, PolyClass, RootPoly};

pub use num_complex::Complex64;
