//! Prolog refactoring toolkit: parsing, program model, analyses,
//! transformations emitted as text edits, and a reference interpreter used
//! to check that refactorings preserve behaviour.

pub mod syntax;
pub mod model;
pub mod oracle;
pub mod analysis;
pub mod edit;
pub mod transform;
