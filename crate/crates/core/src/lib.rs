//! Least angle regression and the Lasso, Stagewise and positive Lasso paths it
//! computes, with Cp and bootstrap degrees-of-freedom model selection.

pub mod datasets;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod path;
pub mod preprocess;
pub mod select;
pub mod variants;

pub use error::{LarsError, Result};
pub use path::{fit_path, interpolate, Action, FitOptions, Path, PathStep, PathWarning, Variant};
pub use preprocess::{quadratic_expand, standardize, to_original_units, StandardizedDesign};
