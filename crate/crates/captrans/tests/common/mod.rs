//! Shared helpers for integration tests: a seeded generator of desk-scale
//! instances small enough for exhaustive verification.

use captrans::instance::{
    CostSchedule, Horizon, Instance, Item, Machine, MachinePool, ModelOptions,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + unit(rng) * (hi - lo)
}

pub fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Random tiny instance: at most 3 periods, 2 machines, 2 items, single
/// shift, no maintenance. Demand is scaled to fleet capacity; roughly one
/// seed in ten demands more than the fleet can ever produce.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let periods = 1 + pick(&mut rng, 3);
    let n_machines = 1 + pick(&mut rng, 2);
    let n_items = 1 + pick(&mut rng, 2);
    let shift_length = 10.0;
    let utilization = range(&mut rng, 0.7, 1.0);

    // One existing machine occasionally, running the single allowed shift.
    let with_existing = n_machines == 2 && pick(&mut rng, 3) == 0;
    let initial_shifts = if with_existing { 1 } else { 0 };

    let mut machines = Vec::new();
    for k in 0..n_machines {
        let existing = with_existing && k == 0;
        let useful_life = range(&mut rng, 30.0, 80.0);
        machines.push(Machine {
            id: format!("m{}", k + 1),
            technology: format!("tech{}", k + 1),
            pool: if existing {
                MachinePool::Existing
            } else {
                MachinePool::Candidate
            },
            initial_state: if existing { 1 } else { 0 },
            useful_life,
            max_utilization: utilization,
            maintenance_interval: useful_life,
            maintenance_durations: vec![0.5],
            workers_required: 1.0 + pick(&mut rng, 2) as f64,
            remaining_life_start: if existing {
                range(&mut rng, 10.0, useful_life)
            } else {
                0.0
            },
        });
    }
    let technologies: Vec<String> = machines.iter().map(|m| m.technology.clone()).collect();

    // Fleet capacity per period at one shift, in hours.
    let capacity = n_machines as f64 * utilization * shift_length;
    let infeasible = pick(&mut rng, 10) == 0;
    let load_share = if infeasible {
        range(&mut rng, 3.0, 5.0)
    } else {
        range(&mut rng, 0.2, 0.7)
    };

    let mut items = Vec::new();
    for i in 0..n_items {
        let rate = range(&mut rng, 1.0, 3.0);
        let rates: Vec<f64> = (0..n_machines)
            .map(|_| {
                if pick(&mut rng, 6) == 0 && n_machines > 1 {
                    0.0
                } else {
                    rate * range(&mut rng, 0.8, 1.2)
                }
            })
            .collect();
        // Ensure at least one producer.
        let rates = if rates.iter().all(|&r| r == 0.0) {
            vec![rate; n_machines]
        } else {
            rates
        };
        let min_rate = rates.iter().cloned().filter(|&r| r > 0.0).fold(f64::MAX, f64::min);
        let demand: Vec<f64> = (0..periods)
            .map(|_| {
                let hours = capacity * load_share / n_items as f64 * range(&mut rng, 0.5, 1.0);
                (hours * min_rate).round()
            })
            .collect();
        items.push(Item {
            id: format!("item{}", i + 1),
            demand,
            initial_inventory: if pick(&mut rng, 4) == 0 {
                range(&mut rng, 0.0, 3.0).round()
            } else {
                0.0
            },
            production_rate: rates,
            production_emission: (0..n_machines)
                .map(|_| range(&mut rng, 0.05, 0.5))
                .collect(),
            holding_emission: range(&mut rng, 0.01, 0.1),
        });
    }

    let carbon_tax: Vec<f64> = {
        let start = range(&mut rng, 1.0, 5.0);
        let step = range(&mut rng, 0.0, 3.0);
        (0..periods).map(|t| start + step * t as f64).collect()
    };

    let costs = CostSchedule {
        discount_rate: range(&mut rng, 0.0, 0.2),
        investment: (0..n_machines).map(|_| range(&mut rng, 40.0, 120.0)).collect(),
        production: (0..n_items)
            .map(|_| (0..n_machines).map(|_| range(&mut rng, 0.5, 3.0)).collect())
            .collect(),
        maintenance: vec![vec![1.0]; n_machines],
        labor: (0..n_machines).map(|_| range(&mut rng, 2.0, 8.0)).collect(),
        hiring: (0..n_machines).map(|_| range(&mut rng, 1.0, 6.0)).collect(),
        firing: (0..n_machines).map(|_| range(&mut rng, 1.0, 6.0)).collect(),
        shift_opening: [range(&mut rng, 0.0, 4.0); 4],
        shift_closing: [range(&mut rng, 0.0, 4.0); 4],
        holding: (0..n_items).map(|_| range(&mut rng, 0.2, 1.5)).collect(),
        carbon_tax,
        salvage_rate: (0..n_machines).map(|_| range(&mut rng, 0.1, 1.0)).collect(),
    };

    Instance::new(
        Horizon {
            periods,
            simulated_periods: periods,
            shift_length,
            allowed_shifts: vec![0, 1, 2, 3],
            initial_shifts,
        },
        machines,
        items,
        technologies,
        costs,
        ModelOptions {
            maintenance: false,
            single_shift: true,
            increasing_tax: false,
        },
    )
    .expect("generated instance must validate")
}
