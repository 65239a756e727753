//! Built-in reference instance: a juice producer choosing between a dirty
//! and a clean production-line technology while carbon taxes rise.
//!
//! All parameters follow the published reference data for this problem, with
//! one documented adjustment: the source lists identical per-unit production
//! emissions for both technologies, which would leave the clean technology
//! with no emission advantage at all. This module applies the documented
//! default of halving the clean technology's emissions (ratio 0.5). Use
//! [`crate::scenario::apply_technology_ratios`] to study other ratios.

use super::{CostSchedule, Horizon, Instance, Item, Machine, MachinePool, ModelOptions};

pub const DIRTY: &str = "dirty";
pub const CLEAN: &str = "clean";

/// Default emission ratio applied to the clean technology column.
pub const CLEAN_EMISSION_RATIO: f64 = 0.5;

const ITEMS: usize = 8;
const FULL_SIMULATED: usize = 12;
const FULL_REPORTED: usize = 8;

const RATES: [f64; ITEMS] = [480.0, 672.0, 576.0, 336.0, 528.0, 624.0, 768.0, 816.0];
const HOLDING_EMISSIONS: [f64; ITEMS] = [0.023, 0.032, 0.027, 0.016, 0.025, 0.029, 0.036, 0.038];
const PRODUCTION_COSTS: [f64; ITEMS] = [0.075, 0.105, 0.09, 0.053, 0.083, 0.098, 0.12, 0.128];
const HOLDING_COSTS: [f64; ITEMS] = [0.66, 0.92, 0.79, 0.46, 0.72, 0.85, 1.05, 1.12];
const DIRTY_EMISSIONS: [f64; ITEMS] = [0.30, 0.21, 0.25, 0.42, 0.27, 0.23, 0.18, 0.17];

const DEMAND: [[f64; FULL_SIMULATED]; ITEMS] = [
    [
        20000.0, 47726.0, 63945.0, 75452.0, 84378.0, 91670.0, 97836.0, 103178.0, 107889.0,
        112103.0, 115916.0, 119396.0,
    ],
    [
        28000.0, 66816.0, 89522.0, 105633.0, 118129.0, 128339.0, 136971.0, 144449.0, 151045.0,
        156945.0, 162282.0, 167155.0,
    ],
    [
        24000.0, 57271.0, 76733.0, 90542.0, 101253.0, 110004.0, 117404.0, 123813.0, 129467.0,
        134524.0, 139099.0, 143276.0,
    ],
    [
        14000.0, 33408.0, 44761.0, 52816.0, 59064.0, 64169.0, 68485.0, 72224.0, 75522.0, 78472.0,
        81141.0, 83577.0,
    ],
    [
        22000.0, 52498.0, 70339.0, 82997.0, 92815.0, 100837.0, 107620.0, 113495.0, 118678.0,
        123314.0, 127507.0, 131336.0,
    ],
    [
        26000.0, 62044.0, 83128.0, 98087.0, 109691.0, 119172.0, 127187.0, 134131.0, 140256.0,
        145734.0, 150691.0, 155215.0,
    ],
    [
        32000.0, 76361.0, 102311.0, 120723.0, 135004.0, 146673.0, 156538.0, 165084.0, 172622.0,
        179365.0, 185465.0, 191034.0,
    ],
    [
        34000.0, 81134.0, 108706.0, 128268.0, 143442.0, 155840.0, 166322.0, 175402.0, 183411.0,
        190576.0, 197057.0, 202974.0,
    ],
];

const USEFUL_LIFE: f64 = 20000.0;
const UTILIZATION: f64 = 0.85;
const SHIFT_LENGTH: f64 = 2080.0;
const MAINTENANCE_INTERVAL: f64 = 5000.0;
const MAINTENANCE_DURATION: f64 = 4.0;
const WORKERS: f64 = 2.0;
const LABOR_COST: f64 = 4500.0;
const HIRE_FIRE_COST: f64 = 5000.0;
const SHIFT_CHANGE_COST: f64 = 5000.0;
const MAINTENANCE_COST: f64 = 600.0;
const DIRTY_INVESTMENT: f64 = 65000.0;
const CLEAN_INVESTMENT: f64 = 104000.0;
const DISCOUNT_RATE: f64 = 0.10;
const TAX_START: f64 = 35.0;
const TAX_END: f64 = 70.0;
const SALVAGE_FACTOR: f64 = 0.8;

/// How to size the built-in example.
#[derive(Debug, Clone, Copy)]
pub struct ExampleScale {
    pub simulated_periods: usize,
    pub reported_periods: usize,
    /// Candidate machines per technology; `None` sizes the fleet so that
    /// capacity can always meet peak demand.
    pub candidates_per_technology: Option<usize>,
}

impl Default for ExampleScale {
    fn default() -> Self {
        ExampleScale {
            simulated_periods: FULL_SIMULATED,
            reported_periods: FULL_REPORTED,
            candidates_per_technology: None,
        }
    }
}

/// The built-in reference instance at full scale: 8 items, 12 simulated
/// periods of which 8 are reported, rising tax from 35 to 70 per CO2 ton.
pub fn appendix_example() -> Instance {
    appendix_example_scaled(ExampleScale::default())
}

/// The built-in reference instance with a custom horizon or fleet size.
pub fn appendix_example_scaled(scale: ExampleScale) -> Instance {
    let simulated = scale.simulated_periods;
    let reported = scale.reported_periods;
    assert!(
        (1..=FULL_SIMULATED).contains(&simulated) && reported <= simulated,
        "example scale out of range"
    );

    let horizon = Horizon {
        periods: reported,
        simulated_periods: simulated,
        shift_length: SHIFT_LENGTH,
        allowed_shifts: vec![0, 1, 2, 3],
        initial_shifts: 0,
    };

    // Tax ramps linearly over the reported horizon, then holds steady
    // through the simulated tail.
    let carbon_tax: Vec<f64> = (0..simulated)
        .map(|t0| {
            if reported <= 1 || t0 + 1 >= reported {
                TAX_END
            } else {
                TAX_START + (TAX_END - TAX_START) * t0 as f64 / (reported - 1) as f64
            }
        })
        .collect();

    let candidates = scale
        .candidates_per_technology
        .unwrap_or_else(|| default_candidate_count(simulated));

    let mut machines = Vec::new();
    let mut investment = Vec::new();
    let mut salvage = Vec::new();
    for (tech, ci) in [(DIRTY, DIRTY_INVESTMENT), (CLEAN, CLEAN_INVESTMENT)] {
        for n in 1..=candidates {
            machines.push(Machine {
                id: format!("{tech}-{n}"),
                technology: tech.to_string(),
                pool: MachinePool::Candidate,
                initial_state: 0,
                useful_life: USEFUL_LIFE,
                max_utilization: UTILIZATION,
                maintenance_interval: MAINTENANCE_INTERVAL,
                maintenance_durations: vec![MAINTENANCE_DURATION; 4],
                workers_required: WORKERS,
                remaining_life_start: 0.0,
            });
            investment.push(ci);
            salvage.push(SALVAGE_FACTOR * ci / USEFUL_LIFE);
        }
    }
    let n_machines = machines.len();

    let items: Vec<Item> = (0..ITEMS)
        .map(|i| {
            let emission = |k: usize| {
                if machines[k].technology == CLEAN {
                    DIRTY_EMISSIONS[i] * CLEAN_EMISSION_RATIO
                } else {
                    DIRTY_EMISSIONS[i]
                }
            };
            Item {
                id: format!("item-{}", i + 1),
                demand: DEMAND[i][..simulated].to_vec(),
                initial_inventory: 0.0,
                production_rate: vec![RATES[i]; n_machines],
                production_emission: (0..n_machines).map(emission).collect(),
                holding_emission: HOLDING_EMISSIONS[i],
            }
        })
        .collect();

    let costs = CostSchedule {
        discount_rate: DISCOUNT_RATE,
        investment,
        production: (0..ITEMS)
            .map(|i| vec![PRODUCTION_COSTS[i]; n_machines])
            .collect(),
        maintenance: vec![vec![MAINTENANCE_COST; 4]; n_machines],
        labor: vec![LABOR_COST; n_machines],
        hiring: vec![HIRE_FIRE_COST; n_machines],
        firing: vec![HIRE_FIRE_COST; n_machines],
        shift_opening: [SHIFT_CHANGE_COST; 4],
        shift_closing: [SHIFT_CHANGE_COST; 4],
        holding: HOLDING_COSTS.to_vec(),
        carbon_tax,
        salvage_rate: salvage,
    };

    Instance::new(
        horizon,
        machines,
        items,
        vec![DIRTY.to_string(), CLEAN.to_string()],
        costs,
        ModelOptions::default(),
    )
    .expect("built-in example must validate")
}

/// Candidate machines per technology so that the fleet can always cover the
/// busiest period even at three shifts: ceil(peak hours / (mu * 3 * l)) + 1.
fn default_candidate_count(simulated: usize) -> usize {
    let peak_hours = (0..simulated)
        .map(|t| (0..ITEMS).map(|i| DEMAND[i][t] / RATES[i]).sum::<f64>())
        .fold(0.0f64, f64::max);
    let per_machine = UTILIZATION * 3.0 * SHIFT_LENGTH;
    ((peak_hours / per_machine - 1e-9).ceil() as usize).max(1) + 1
}

#[cfg(test)]
pub(super) fn test_machine() -> Machine {
    Machine {
        id: "m".into(),
        technology: DIRTY.into(),
        pool: MachinePool::Candidate,
        initial_state: 0,
        useful_life: 20000.0,
        max_utilization: 0.85,
        maintenance_interval: 5000.0,
        maintenance_durations: vec![4.0; 4],
        workers_required: 2.0,
        remaining_life_start: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example_matches_reference_values() {
        let inst = appendix_example();
        assert_eq!(inst.items.len(), 8);
        assert_eq!(inst.horizon.simulated_periods, 12);
        assert_eq!(inst.horizon.periods, 8);
        // First item, first period demand.
        assert_eq!(inst.items[0].demand[0], 20000.0);
        // Clean technology investment cost in the base period.
        let clean_machine = inst.machine_index("clean-1").unwrap();
        assert_eq!(inst.costs.investment[clean_machine], 104000.0);
        assert_eq!(inst.tables.investment[clean_machine][0], 104000.0);
        // Shift work starts closed down.
        assert_eq!(inst.horizon.initial_shifts, 0);
    }

    #[test]
    fn labor_cost_follows_declining_rule() {
        // Independent evaluation of C_t = C_1 (1 + 0.1)^(1-t) at t = 2.
        let inst = appendix_example();
        let expected = 4500.0 * (1.1f64).powi(-1);
        assert!((inst.tables.labor[0][1] - expected).abs() < 1e-9);
    }

    #[test]
    fn tax_ramps_over_reported_horizon_then_holds() {
        let inst = appendix_example();
        let tax = &inst.tables.carbon_tax;
        assert_eq!(tax[0], 35.0);
        assert_eq!(tax[7], 70.0);
        for w in tax.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for &t in &tax[8..] {
            assert_eq!(t, 70.0);
        }
        // The 8-period ramp lands on exact 5-unit steps.
        assert_eq!(tax[1], 40.0);
        assert_eq!(tax[4], 55.0);
    }

    #[test]
    fn clean_emissions_are_halved_by_default() {
        let inst = appendix_example();
        let dirty = inst.machine_index("dirty-1").unwrap();
        let clean = inst.machine_index("clean-1").unwrap();
        for item in &inst.items {
            assert!((item.production_emission[clean]
                - CLEAN_EMISSION_RATIO * item.production_emission[dirty])
                .abs()
                < 1e-12);
        }
    }

    #[test]
    fn salvage_rate_derived_from_investment() {
        let inst = appendix_example();
        let dirty = inst.machine_index("dirty-1").unwrap();
        assert!((inst.costs.salvage_rate[dirty] - 0.8 * 65000.0 / 20000.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_example_controls_fleet_and_horizon() {
        let inst = appendix_example_scaled(ExampleScale {
            simulated_periods: 6,
            reported_periods: 4,
            candidates_per_technology: Some(3),
        });
        assert_eq!(inst.machines.len(), 6);
        assert_eq!(inst.horizon.simulated_periods, 6);
        assert_eq!(inst.horizon.periods, 4);
        assert_eq!(inst.tables.carbon_tax[0], 35.0);
        assert_eq!(inst.tables.carbon_tax[3], 70.0);
        assert_eq!(inst.tables.carbon_tax[5], 70.0);
    }
}
