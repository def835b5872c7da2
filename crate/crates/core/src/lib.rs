//! Default rules with exceptions, learned from tabular data, evaluated as
//! stratified answer set programs, and used to correct low-confidence
//! predictions of a conventional classifier.

pub mod asp;
pub mod classifiers;
pub mod dataset;
pub mod decimal;
pub mod induction;
pub mod hybrid;
pub mod evaluation;
pub mod cli;
