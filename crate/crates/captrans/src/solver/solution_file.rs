//! Solution interchange files: one `name value` pair per line, `#`
//! comments, names exactly as the LP export writes them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::lp_file::sanitized_names;
use crate::error::{Error, Result};
use crate::model::{MilpModel, Plan};

/// Writes a solution vector using the exported variable names.
pub fn write_solution_file(
    model: &MilpModel,
    values: &[f64],
    objective: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if values.len() != model.num_variables() {
        return Err(Error::InvalidArgument(format!(
            "solution has {} values, model has {} variables",
            values.len(),
            model.num_variables()
        )));
    }
    let names = sanitized_names(model)?;
    let mut text = String::new();
    let _ = writeln!(text, "# variant {}", model.variant);
    let _ = writeln!(text, "# objective {objective:?}");
    for (name, value) in names.iter().zip(values) {
        let _ = writeln!(text, "{name} {value:?}");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a solution file into a vector ordered like the model's variables.
/// Every variable must be present exactly once; unknown names are rejected.
pub fn read_solution_values(model: &MilpModel, path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let names = sanitized_names(model)?;
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(j, n)| (n.as_str(), j))
        .collect();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut values = vec![f64::NAN; model.num_variables()];
    let mut filled = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value)) = (parts.next(), parts.next()) else {
            return Err(Error::parse(
                path,
                format!("line {}: expected 'name value', got '{line}'", lineno + 1),
            ));
        };
        if parts.next().is_some() {
            return Err(Error::parse(
                path,
                format!("line {}: trailing tokens after value", lineno + 1),
            ));
        }
        let j = *index.get(name).ok_or_else(|| {
            Error::SolutionRejected(format!("unknown variable name '{name}'"))
        })?;
        let value: f64 = value.parse().map_err(|_| {
            Error::parse(path, format!("line {}: bad number '{value}'", lineno + 1))
        })?;
        if values[j].is_nan() {
            filled += 1;
        }
        values[j] = value;
    }
    if filled != values.len() {
        return Err(Error::SolutionRejected(format!(
            "solution file covers {filled} of {} variables",
            values.len()
        )));
    }
    Ok(values)
}

/// Reads an externally produced solution and verifies it against the model
/// before decoding.
pub fn import_external_solution(path: impl AsRef<Path>, model: &MilpModel) -> Result<Plan> {
    let values = read_solution_values(model, &path)?;
    model.decode(&values)
}
