//! Finite-model toolkit for intuitionistic linear temporal logic over
//! dynamic posets: formulas, models, model checking, bounded bisimulations,
//! model enumeration and the standard countermodel constructions.

pub mod bisim;
pub mod checker;
pub mod countermodels;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod reproduce;
pub mod search;

pub use checker::{extension, satisfies, satisfies_at, Checker, Orbit};
pub use formula::{parse_formula, Formula, Fragment};
pub use model::{FrameClass, Model, ModelBuilder, WorldId, WorldSet};
