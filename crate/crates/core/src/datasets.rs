//! Bundled data.

use ndarray::{Array1, Array2};

use crate::io::{parse_csv, CsvData};

/// Raw text of the diabetes data: 442 patients, ten baseline covariates
/// `AGE, SEX, BMI, BP, S1..S6` and the disease progression response `Y`.
pub const DIABETES_CSV: &str = include_str!("../data/diabetes.csv");

/// The diabetes data as `(covariates, response, names)`.
pub fn diabetes() -> (Array2<f64>, Array1<f64>, Vec<String>) {
    let CsvData {
        columns,
        response,
        names,
    } = parse_csv(DIABETES_CSV, "Y").expect("bundled diabetes data parses");
    (columns, response, names)
}
