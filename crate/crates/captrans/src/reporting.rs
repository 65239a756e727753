//! Machine-readable result tables: comma-delimited, UTF-8, LF endings,
//! header row first, floats written in shortest exact form so a reader
//! recovers the identical values. A manifest lists the files written
//! together with the seed and a hash of the producing configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::effectiveness::EffectivenessReport;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::Plan;
use crate::scenario::{SweepSummary, SweepResult};

/// Everything a run wants serialized; absent tables are skipped.
#[derive(Debug, Default)]
pub struct ReportBundle {
    pub plan_rows: Option<Vec<PlanRow>>,
    pub levels: Option<LevelsTable>,
    pub emissions: Option<Vec<(usize, f64)>>,
    pub emissions_compare: Option<Vec<(usize, f64, f64)>>,
    pub sweep: Option<SweepSummary>,
    pub scenarios: Option<SweepResult>,
    pub seed: Option<u64>,
    /// Free-form description of the producing configuration; hashed into
    /// the manifest.
    pub config_description: String,
}

/// One machine-period line of a plan table.
#[derive(Debug, Clone)]
pub struct PlanRow {
    pub machine: String,
    pub period: usize,
    pub state: u8,
    pub transition: String,
    pub production_hours: f64,
    pub maintenance: usize,
    pub clock_hours: f64,
    pub remaining_life: f64,
    pub salvaged_life: f64,
}

#[derive(Debug, Clone)]
pub struct LevelsTable {
    pub technologies: Vec<String>,
    /// levels[tech][period], reported horizon.
    pub levels: Vec<Vec<f64>>,
}

/// Shortest representation that parses back to the identical double.
fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

/// Builds the per-plan tables from a decoded plan.
pub fn plan_table(plan: &Plan, instance: &Instance) -> Vec<PlanRow> {
    let mut rows = Vec::new();
    for (k, machine) in instance.machines.iter().enumerate() {
        for t in 0..instance.horizon.simulated_periods {
            let transition = plan.transitions[k][t];
            rows.push(PlanRow {
                machine: machine.id.clone(),
                period: t + 1,
                state: transition.head(),
                transition: format!("{}->{}", transition.tail(), transition.head()),
                production_hours: plan.machine_hours(instance, k, t),
                maintenance: plan.maintenance[k]
                    .iter()
                    .filter(|slots| slots[t])
                    .count(),
                clock_hours: plan.maintenance_clock[k][t],
                remaining_life: plan.remaining_life[k][t],
                salvaged_life: plan.salvage_life[k][t],
            });
        }
    }
    rows
}

pub fn levels_table(report: &EffectivenessReport, instance: &Instance) -> LevelsTable {
    LevelsTable {
        technologies: instance.technologies.iter().map(|t| t.id.clone()).collect(),
        levels: report.levels.clone(),
    }
}

/// Writes every present table plus `manifest.toml`; returns the paths.
pub fn write_reports(bundle: &ReportBundle, directory: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = directory.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    if let Some(rows) = &bundle.plan_rows {
        let mut text = String::from(
            "machine,period,state,transition,production_hours,maintenance,clock_hours,remaining_life,salvaged_life\n",
        );
        for row in rows {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{},{}",
                row.machine,
                row.period,
                row.state,
                row.transition,
                fmt_f64(row.production_hours),
                row.maintenance,
                fmt_f64(row.clock_hours),
                fmt_f64(row.remaining_life),
                fmt_f64(row.salvaged_life),
            );
        }
        written.push(write_file(dir, "plan.csv", &text)?);
    }

    if let Some(table) = &bundle.levels {
        let mut text = String::from("period");
        for tech in &table.technologies {
            let _ = write!(text, ",R_{tech}");
        }
        text.push('\n');
        let periods = table.levels.first().map_or(0, Vec::len);
        for t in 0..periods {
            let _ = write!(text, "{}", t + 1);
            for series in &table.levels {
                let _ = write!(text, ",{}", fmt_f64(series[t]));
            }
            text.push('\n');
        }
        written.push(write_file(dir, "levels.csv", &text)?);
    }

    if let Some(series) = &bundle.emissions {
        let mut text = String::from("period,emissions\n");
        for &(t, e) in series {
            let _ = writeln!(text, "{t},{}", fmt_f64(e));
        }
        written.push(write_file(dir, "emissions.csv", &text)?);
    }

    if let Some(series) = &bundle.emissions_compare {
        let mut text = String::from("period,emissions_spt,emissions_spwt\n");
        for &(t, taxed, untaxed) in series {
            let _ = writeln!(text, "{t},{},{}", fmt_f64(taxed), fmt_f64(untaxed));
        }
        written.push(write_file(dir, "emissions_compare.csv", &text)?);
    }

    if let Some(summary) = &bundle.sweep {
        let mut text = String::from(
            "ep_ratio,ci_ratio,attempted,solved,p_zero,p_ge_050,p_ge_075,p_full,expected_level\n",
        );
        for cell in &summary.cells {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(cell.ep_ratio),
                fmt_f64(cell.ci_ratio),
                cell.attempted,
                cell.solved,
                fmt_f64(cell.probability_zero),
                fmt_f64(cell.probability_at_least_half),
                fmt_f64(cell.probability_at_least_three_quarters),
                fmt_f64(cell.probability_full),
                fmt_f64(cell.expected_level),
            );
        }
        written.push(write_file(dir, "sweep.csv", &text)?);

        let mut text = String::from("ep_ratio,ci_ratio,beta,finite,q1,median,q3\n");
        for cell in &summary.cells {
            for tau in &cell.transition_quartiles {
                match tau.quartiles {
                    Some([q1, q2, q3]) => {
                        let _ = writeln!(
                            text,
                            "{},{},{},{},{},{},{}",
                            fmt_f64(cell.ep_ratio),
                            fmt_f64(cell.ci_ratio),
                            fmt_f64(tau.beta),
                            tau.finite,
                            fmt_f64(q1),
                            fmt_f64(q2),
                            fmt_f64(q3),
                        );
                    }
                    None => {
                        let _ = writeln!(
                            text,
                            "{},{},{},0,,,",
                            fmt_f64(cell.ep_ratio),
                            fmt_f64(cell.ci_ratio),
                            fmt_f64(tau.beta),
                        );
                    }
                }
            }
        }
        written.push(write_file(dir, "tau.csv", &text)?);
    }

    if let Some(result) = &bundle.scenarios {
        let mut text = String::from("index,xi,ep_ratio,ci_ratio,status,objective,final_level");
        for beta in &result.betas {
            let _ = write!(text, ",tau_{}", fmt_f64(*beta));
        }
        text.push('\n');
        for s in &result.scenarios {
            let _ = write!(
                text,
                "{},{},{},{},{:?},{},{}",
                s.instance_index,
                fmt_f64(s.xi),
                fmt_f64(s.ep_ratio),
                fmt_f64(s.ci_ratio),
                s.status,
                s.objective.map_or(String::new(), |o| fmt_f64(o)),
                s.final_level.map_or(String::new(), |v| fmt_f64(v)),
            );
            for tau in &s.transition_periods {
                match tau {
                    Some(t) => {
                        let _ = write!(text, ",{t}");
                    }
                    None => text.push(','),
                }
            }
            text.push('\n');
        }
        written.push(write_file(dir, "scenarios.csv", &text)?);
    }

    // Manifest last: lists everything written above.
    let mut manifest = String::from("schema = 1\n\n[run]\n");
    if let Some(seed) = bundle.seed {
        let _ = writeln!(manifest, "seed = {seed}");
    }
    let _ = writeln!(
        manifest,
        "config_hash = \"{:016x}\"",
        fnv1a(bundle.config_description.as_bytes())
    );
    manifest.push_str("\n[files]\n");
    for path in &written {
        let name = path.file_name().unwrap().to_string_lossy();
        let stem = name.trim_end_matches(".csv").replace('-', "_");
        let _ = writeln!(manifest, "{stem} = \"{name}\"");
    }
    written.push(write_file(dir, "manifest.toml", &manifest)?);
    Ok(written)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// 64-bit FNV-1a hash for stable config fingerprints.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
