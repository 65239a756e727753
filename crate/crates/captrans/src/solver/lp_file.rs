//! LP-format export and a matching parser for round-trip checks.
//!
//! The writer emits the common LP text format (objective, `Subject To`
//! rows, `Bounds`, `Binaries`, `End`) with variable names sanitized to
//! `[A-Za-z0-9_]`. The parser reads the same subset back so exports can be
//! verified coefficient-by-coefficient, and so externally produced files
//! stay debuggable without another tool.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::super::model::{MilpModel, Sense, VarKind};
use crate::error::{Error, Result};

/// Maps every variable to its LP-safe name, rejecting collisions.
pub(crate) fn sanitized_names(model: &MilpModel) -> Result<Vec<String>> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::with_capacity(model.num_variables());
    for (j, var) in model.variables.iter().enumerate() {
        let name = sanitize(&var.name);
        if let Some(&other) = seen.get(&name) {
            return Err(Error::Export(format!(
                "variable name collision after sanitizing: '{}' and '{}' both map to '{name}'",
                model.variables[other].name, var.name
            )));
        }
        seen.insert(name.clone(), j);
        names.push(name);
    }
    Ok(names)
}

pub(crate) fn sanitize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut last_underscore = false;
    for c in raw.chars() {
        let mapped = if c.is_ascii_alphanumeric() { c } else { '_' };
        if mapped == '_' {
            if !last_underscore && !out.is_empty() {
                out.push('_');
            }
            last_underscore = true;
        } else {
            out.push(mapped);
            last_underscore = false;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

fn push_term(line: &mut String, first: bool, coeff: f64, name: &str) {
    if first {
        if coeff < 0.0 {
            let _ = write!(line, "- {:?} {}", -coeff, name);
        } else {
            let _ = write!(line, "{coeff:?} {name}");
        }
    } else if coeff < 0.0 {
        let _ = write!(line, " - {:?} {}", -coeff, name);
    } else {
        let _ = write!(line, " + {coeff:?} {name}");
    }
}

/// Writes the model in LP format. Returns the sanitized variable names in
/// variable order (the same names a solution file must use).
pub fn export_lp_file(model: &MilpModel, path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let names = sanitized_names(model)?;
    let mut text = String::new();
    let _ = writeln!(text, "\\ capacity planning model, variant {}", model.variant);
    let _ = writeln!(
        text,
        "\\ {} variables, {} rows",
        model.num_variables(),
        model.num_rows()
    );
    text.push_str("Minimize\n obj:");
    let mut first = true;
    let mut line_len = 0usize;
    for (j, &c) in model.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut term = String::new();
        push_term(&mut term, first, c, &names[j]);
        first = false;
        if line_len + term.len() > 220 {
            text.push_str("\n  ");
            line_len = 0;
            if term.starts_with(' ') {
                term.remove(0);
            }
        } else {
            text.push(' ');
        }
        line_len += term.len();
        text.push_str(&term);
    }
    text.push_str("\nSubject To\n");
    for row in &model.rows {
        let mut line = format!(" {}:", sanitize(&row.name));
        let mut first = true;
        let mut line_len = line.len();
        for &(j, a) in &row.coeffs {
            let mut term = String::new();
            push_term(&mut term, first, a, &names[j]);
            first = false;
            if line_len + term.len() > 220 {
                line.push_str("\n  ");
                line_len = 0;
                if term.starts_with(' ') {
                    term.remove(0);
                }
            } else {
                line.push(' ');
            }
            line_len += term.len();
            line.push_str(&term);
        }
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(line, " {sense} {:?}", row.rhs);
        text.push_str(&line);
    }
    text.push_str("Bounds\n");
    for (j, var) in model.variables.iter().enumerate() {
        let name = &names[j];
        match var.kind {
            VarKind::Binary => {
                // Binaries default to [0,1]; only pinned ones need a line.
                if var.lower == var.upper {
                    let _ = writeln!(text, " {name} = {:?}", var.lower);
                } else if var.lower > 0.0 || var.upper < 1.0 {
                    let _ = writeln!(text, " {:?} <= {name} <= {:?}", var.lower, var.upper);
                }
            }
            VarKind::Continuous => {
                // Default bounds are [0, +inf); print deviations only.
                let default_lower = var.lower == 0.0;
                let default_upper = var.upper.is_infinite();
                match (default_lower, default_upper) {
                    (true, true) => {}
                    (false, true) => {
                        if var.lower.is_infinite() {
                            let _ = writeln!(text, " {name} free");
                        } else {
                            let _ = writeln!(text, " {name} >= {:?}", var.lower);
                        }
                    }
                    (true, false) => {
                        let _ = writeln!(text, " {name} <= {:?}", var.upper);
                    }
                    (false, false) => {
                        if var.lower == var.upper {
                            let _ = writeln!(text, " {name} = {:?}", var.lower);
                        } else {
                            let _ =
                                writeln!(text, " {:?} <= {name} <= {:?}", var.lower, var.upper);
                        }
                    }
                }
            }
        }
    }
    let binaries: Vec<&String> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        text.push_str("Binaries\n");
        let mut line = String::from(" ");
        for name in binaries {
            if line.len() + name.len() > 220 {
                text.push_str(line.trim_end());
                text.push('\n');
                line = String::from(" ");
            }
            let _ = write!(line, "{name} ");
        }
        if !line.trim().is_empty() {
            text.push_str(line.trim_end());
            text.push('\n');
        }
    }
    text.push_str("End\n");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(names)
}

#[derive(Debug, Clone)]
pub struct ParsedRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLp {
    pub minimize: bool,
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<ParsedRow>,
    /// Explicit bounds; variables not listed keep format defaults.
    pub bounds: HashMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

/// Parses the subset of LP format that [`export_lp_file`] writes.
pub fn parse_lp_file(path: impl AsRef<Path>) -> Result<ParsedLp> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut parsed = ParsedLp {
        minimize: true,
        ..Default::default()
    };
    let mut section = Section::Preamble;
    let mut pending: Vec<String> = Vec::new();
    let mut flush_error: Option<String> = None;

    let mut flush_row = |tokens: &mut Vec<String>, parsed: &mut ParsedLp| {
        if tokens.is_empty() {
            return;
        }
        match parse_row(tokens) {
            Ok(row) => parsed.rows.push(row),
            Err(e) => flush_error = Some(e),
        }
        tokens.clear();
    };

    for raw_line in text.lines() {
        let line = match raw_line.find('\\') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let keyword = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "maximize" | "maximise" | "max" => {
                parsed.minimize = false;
                Some(Section::Objective)
            }
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::Done),
            "generals" | "general" | "integers" | "semi-continuous" => {
                return Err(Error::parse(path, format!("unsupported section '{trimmed}'")));
            }
            _ => None,
        };
        if let Some(next) = keyword {
            if section == Section::Rows {
                flush_row(&mut pending, &mut parsed);
            } else if section == Section::Objective {
                parsed.objective = parse_objective(&pending).map_err(|e| Error::parse(path, e))?;
                pending.clear();
            }
            section = next;
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(Error::parse(path, format!("unexpected line '{trimmed}'")));
            }
            Section::Objective => {
                pending.extend(trimmed.split_whitespace().map(str::to_string));
            }
            Section::Rows => {
                // A new row starts with `name:`; continuation lines do not.
                if trimmed.contains(':') {
                    flush_row(&mut pending, &mut parsed);
                }
                pending.extend(trimmed.split_whitespace().map(str::to_string));
            }
            Section::Bounds => {
                parse_bound(trimmed, &mut parsed.bounds).map_err(|e| Error::parse(path, e))?;
            }
            Section::Binaries => {
                parsed
                    .binaries
                    .extend(trimmed.split_whitespace().map(str::to_string));
            }
            Section::Done => {}
        }
    }
    if section == Section::Rows {
        flush_row(&mut pending, &mut parsed);
    }
    if let Some(e) = flush_error {
        return Err(Error::parse(path, e));
    }
    if section != Section::Done {
        return Err(Error::parse(path, "missing End marker"));
    }
    Ok(parsed)
}

fn parse_objective(tokens: &[String]) -> std::result::Result<Vec<(String, f64)>, String> {
    let mut tokens = tokens.to_vec();
    if let Some(first) = tokens.first() {
        if first.ends_with(':') {
            tokens.remove(0);
        } else if let Some(pos) = first.find(':') {
            let rest = first[pos + 1..].to_string();
            tokens[0] = rest;
            if tokens[0].is_empty() {
                tokens.remove(0);
            }
        }
    }
    parse_terms(&tokens)
}

fn parse_row(tokens: &[String]) -> std::result::Result<ParsedRow, String> {
    let mut tokens = tokens.to_vec();
    let first = tokens
        .first()
        .cloned()
        .ok_or_else(|| "empty row".to_string())?;
    let name;
    if let Some(pos) = first.find(':') {
        name = first[..pos].to_string();
        let rest = first[pos + 1..].to_string();
        if rest.is_empty() {
            tokens.remove(0);
        } else {
            tokens[0] = rest;
        }
    } else {
        return Err(format!("row without name: '{first}'"));
    }
    // Split at the sense token.
    let sense_pos = tokens
        .iter()
        .position(|t| matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">"))
        .ok_or_else(|| format!("row '{name}' lacks a sense"))?;
    let sense = match tokens[sense_pos].as_str() {
        "<=" | "<" => Sense::Le,
        ">=" | ">" => Sense::Ge,
        _ => Sense::Eq,
    };
    if sense_pos + 1 >= tokens.len() {
        return Err(format!("row '{name}' lacks a right-hand side"));
    }
    let rhs: f64 = tokens[sense_pos + 1]
        .parse()
        .map_err(|_| format!("row '{name}': bad rhs '{}'", tokens[sense_pos + 1]))?;
    let terms = parse_terms(&tokens[..sense_pos])?;
    Ok(ParsedRow {
        name,
        terms,
        sense,
        rhs,
    })
}

/// Parses `[+-] [coeff] name` sequences.
fn parse_terms(tokens: &[String]) -> std::result::Result<Vec<(String, f64)>, String> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coeff: Option<f64> = None;
    for token in tokens {
        match token.as_str() {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Ok(value) = token.parse::<f64>() {
                    if coeff.is_some() {
                        return Err(format!("dangling coefficient before '{token}'"));
                    }
                    coeff = Some(value);
                } else {
                    let c = sign * coeff.take().unwrap_or(1.0);
                    terms.push((token.clone(), c));
                    sign = 1.0;
                }
            }
        }
    }
    if coeff.is_some() {
        return Err("trailing coefficient without a variable".into());
    }
    Ok(terms)
}

fn parse_bound(
    line: &str,
    bounds: &mut HashMap<String, (f64, f64)>,
) -> std::result::Result<(), String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let parse_num = |t: &str| -> std::result::Result<f64, String> {
        match t.to_ascii_lowercase().as_str() {
            "+inf" | "inf" | "+infinity" | "infinity" | "1e30" => Ok(f64::INFINITY),
            "-inf" | "-infinity" | "-1e30" => Ok(f64::NEG_INFINITY),
            _ => t.parse().map_err(|_| format!("bad bound number '{t}'")),
        }
    };
    match tokens.as_slice() {
        [name, "free"] => {
            bounds.insert(name.to_string(), (f64::NEG_INFINITY, f64::INFINITY));
        }
        [name, "<=", hi] => {
            let hi = parse_num(hi)?;
            let entry = bounds.entry(name.to_string()).or_insert((0.0, f64::INFINITY));
            entry.1 = hi;
        }
        [name, ">=", lo] => {
            let lo = parse_num(lo)?;
            let entry = bounds.entry(name.to_string()).or_insert((0.0, f64::INFINITY));
            entry.0 = lo;
        }
        [name, "=", value] => {
            let v = parse_num(value)?;
            bounds.insert(name.to_string(), (v, v));
        }
        [lo, "<=", name, "<=", hi] => {
            bounds.insert(name.to_string(), (parse_num(lo)?, parse_num(hi)?));
        }
        _ => return Err(format!("unrecognized bounds line '{line}'")),
    }
    Ok(())
}

/// Exports, re-parses and compares: every coefficient, sense, right-hand
/// side, bound and binary marker must survive the trip exactly.
pub fn verify_lp_round_trip(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let names = export_lp_file(model, path)?;
    let parsed = parse_lp_file(path)?;
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(j, n)| (n.as_str(), j))
        .collect();

    if !parsed.minimize {
        return Err(Error::Export("round trip flipped the sense".into()));
    }
    let mut objective = vec![0.0; model.num_variables()];
    for (name, c) in &parsed.objective {
        let j = *index
            .get(name.as_str())
            .ok_or_else(|| Error::Export(format!("unknown objective variable '{name}'")))?;
        objective[j] += c;
    }
    for (j, (&a, &b)) in model.objective.iter().zip(&objective).enumerate() {
        if a != b {
            return Err(Error::Export(format!(
                "objective coefficient mismatch on {}: {a:?} vs {b:?}",
                model.variables[j].name
            )));
        }
    }

    if parsed.rows.len() != model.num_rows() {
        return Err(Error::Export(format!(
            "row count mismatch: wrote {}, parsed {}",
            model.num_rows(),
            parsed.rows.len()
        )));
    }
    for (row, back) in model.rows.iter().zip(&parsed.rows) {
        if sanitize(&row.name) != back.name || row.sense != back.sense || row.rhs != back.rhs {
            return Err(Error::Export(format!("row header mismatch on {}", row.name)));
        }
        let mut coeffs = vec![0.0; model.num_variables()];
        for (name, c) in &back.terms {
            let j = *index
                .get(name.as_str())
                .ok_or_else(|| Error::Export(format!("unknown variable '{name}' in row")))?;
            coeffs[j] += c;
        }
        for &(j, a) in &row.coeffs {
            if coeffs[j] != a {
                return Err(Error::Export(format!(
                    "coefficient mismatch in {} on {}",
                    row.name, model.variables[j].name
                )));
            }
            coeffs[j] = 0.0;
        }
        if coeffs.iter().any(|&c| c != 0.0) {
            return Err(Error::Export(format!("extra coefficients in {}", row.name)));
        }
    }

    for (j, var) in model.variables.iter().enumerate() {
        let (lo, hi) = parsed
            .bounds
            .get(&names[j])
            .copied()
            .unwrap_or(match var.kind {
                VarKind::Binary => (0.0, 1.0),
                VarKind::Continuous => (0.0, f64::INFINITY),
            });
        if lo != var.lower || hi != var.upper {
            return Err(Error::Export(format!(
                "bounds mismatch on {}: [{:?}, {:?}] vs [{lo:?}, {hi:?}]",
                var.name, var.lower, var.upper
            )));
        }
        let is_binary = parsed.binaries.iter().any(|n| n == &names[j]);
        if is_binary != (var.kind == VarKind::Binary) {
            return Err(Error::Export(format!("integrality mismatch on {}", var.name)));
        }
    }
    Ok(())
}
