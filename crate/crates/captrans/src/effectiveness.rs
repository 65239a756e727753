//! Transition-effectiveness measures computed from a solved plan.
//!
//! Over the reported horizon (the leading slice of the simulation) this
//! module derives per-period emissions, each technology's share of
//! production, emission-based technology weights, and the first period in
//! which the weighted clean share reaches a threshold. A tax is judged by
//! how high the clean share climbs and how early the thresholds fall.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::Plan;

/// Everything the evaluation needs, over the reported horizon.
#[derive(Debug, Clone)]
pub struct EffectivenessReport {
    /// CO2 tons per period.
    pub emissions: Vec<f64>,
    /// Production share per technology: `levels[tech][period]`.
    pub levels: Vec<Vec<f64>>,
    /// Normalized technology weights (dirtiest weighs zero).
    pub weights: Vec<f64>,
    /// Mean per-unit emissions per technology.
    pub mean_emissions: Vec<f64>,
    /// For each requested threshold: (threshold, first period reaching it).
    pub transition_periods: Vec<(f64, Option<usize>)>,
    /// Weighted level at the end of the reported horizon.
    pub final_weighted_level: f64,
    /// Untaxed-variant emission series for comparison, when supplied.
    pub baseline_emissions: Option<Vec<f64>>,
}

/// Per-period emissions from production and held inventory, over the
/// reported horizon.
pub fn emissions_by_period(plan: &Plan, instance: &Instance) -> Vec<f64> {
    let periods = instance.horizon.periods;
    (0..periods)
        .map(|t| {
            instance
                .items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    let produced: f64 = (0..instance.machines.len())
                        .map(|k| item.production_emission[k] * plan.production[i][k][t])
                        .sum();
                    produced + item.holding_emission * plan.inventory[i][t]
                })
                .sum()
        })
        .collect()
}

/// Share of total production carried by each technology per period.
///
/// Periods without production carry the last defined share forward;
/// leading idle periods default to the dirtiest technology.
pub fn transition_levels(plan: &Plan, instance: &Instance) -> Vec<Vec<f64>> {
    let periods = instance.horizon.periods;
    let n_tech = instance.technologies.len();

    // Dirtiest technology by mean emissions backs the idle-period default.
    let eta = mean_technology_emissions(instance);
    let dirtiest = (0..n_tech)
        .max_by(|&a, &b| eta[a].total_cmp(&eta[b]))
        .unwrap_or(0);

    let mut levels = vec![vec![0.0; periods]; n_tech];
    let mut last: Option<Vec<f64>> = None;
    for t in 0..periods {
        let by_tech: Vec<f64> = instance
            .technologies
            .iter()
            .map(|tech| {
                tech.machines
                    .iter()
                    .map(|&k| {
                        (0..instance.items.len())
                            .map(|i| plan.production[i][k][t])
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        let total: f64 = by_tech.iter().sum();
        let shares = if total > 0.0 {
            let shares: Vec<f64> = by_tech.iter().map(|v| v / total).collect();
            last = Some(shares.clone());
            shares
        } else if let Some(prev) = &last {
            prev.clone()
        } else {
            let mut shares = vec![0.0; n_tech];
            shares[dirtiest] = 1.0;
            shares
        };
        for (j, share) in shares.iter().enumerate() {
            levels[j][t] = *share;
        }
    }
    levels
}

/// Mean per-unit production emissions per technology.
pub fn mean_technology_emissions(instance: &Instance) -> Vec<f64> {
    instance
        .technologies
        .iter()
        .map(|tech| {
            let total: f64 = tech
                .machines
                .iter()
                .map(|&k| {
                    instance
                        .items
                        .iter()
                        .map(|item| item.production_emission[k])
                        .sum::<f64>()
                })
                .sum();
            total / tech.machines.len() as f64
        })
        .collect()
}

/// Normalized inverse-emission weights: the dirtiest technology weighs
/// zero, cleaner ones share the rest, summing to one.
pub fn technology_weights(instance: &Instance) -> Result<Vec<f64>> {
    let eta = mean_technology_emissions(instance);
    if instance.technologies.len() < 2 {
        return Err(Error::InvalidArgument(
            "technology weights need at least two technologies".into(),
        ));
    }
    if eta.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidArgument(
            "technology weights need positive mean emissions".into(),
        ));
    }
    let inverses: Vec<f64> = eta.iter().map(|e| 1.0 / e).collect();
    let min_inverse = inverses.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = inverses.iter().map(|v| v - min_inverse).collect();
    let total: f64 = shifted.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "technology weights degenerate: all technologies have equal mean emissions".into(),
        ));
    }
    Ok(shifted.iter().map(|v| v / total).collect())
}

/// First period (1-based) in which the weighted clean share reaches
/// `beta`; `None` when it never does.
pub fn transition_period(levels: &[Vec<f64>], weights: &[f64], beta: f64) -> Option<usize> {
    let periods = levels.first().map_or(0, Vec::len);
    (0..periods)
        .find(|&t| weighted_level(levels, weights, t) >= beta)
        .map(|t| t + 1)
}

/// Weighted technology level at period index `t` (0-based).
pub fn weighted_level(levels: &[Vec<f64>], weights: &[f64], t: usize) -> f64 {
    levels
        .iter()
        .zip(weights)
        .map(|(series, w)| w * series[t])
        .sum()
}

/// Builds the full report; `baseline` is typically the untaxed plan.
pub fn build_report(
    plan: &Plan,
    instance: &Instance,
    betas: &[f64],
    baseline: Option<&Plan>,
) -> Result<EffectivenessReport> {
    for &beta in betas {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "transition threshold must lie in [0, 1], got {beta}"
            )));
        }
    }
    let weights = technology_weights(instance)?;
    let levels = transition_levels(plan, instance);
    let emissions = emissions_by_period(plan, instance);
    let transition_periods = betas
        .iter()
        .map(|&beta| (beta, transition_period(&levels, &weights, beta)))
        .collect();
    let final_weighted_level =
        weighted_level(&levels, &weights, instance.horizon.periods - 1);
    Ok(EffectivenessReport {
        emissions,
        levels,
        weights,
        mean_emissions: mean_technology_emissions(instance),
        transition_periods,
        final_weighted_level,
        baseline_emissions: baseline.map(|p| emissions_by_period(p, instance)),
    })
}
