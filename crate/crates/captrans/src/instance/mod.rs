//! Planning-problem data: machines, items, technologies, horizon, costs.
//!
//! An [`Instance`] is validated on construction and immutable afterwards, so
//! it can be shared freely across solver workers. Per-period cost tables are
//! derived once from base-period values with the declining factor
//! `C_t = C_1 (1 + rate)^(1 - t)`; the carbon-tax trajectory is stored
//! explicitly per period instead.

mod appendix;
mod file;

pub use appendix::{appendix_example, appendix_example_scaled, ExampleScale};
pub use file::{load_instance, save_instance};

use crate::error::{Error, Result};

/// Whether a machine is already on the floor or merely available for purchase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachinePool {
    Existing,
    Candidate,
}

#[derive(Debug, Clone)]
pub struct Machine {
    pub id: String,
    pub technology: String,
    pub pool: MachinePool,
    /// Operating state at the end of period 0. Candidates must start at 0.
    pub initial_state: u8,
    /// Total useful life in production hours.
    pub useful_life: f64,
    /// Fraction of shift time actually usable, in (0, 1].
    pub max_utilization: f64,
    /// Maximum accumulated production hours between preventive maintenances.
    pub maintenance_interval: f64,
    /// Hours consumed by the w-th maintenance, one entry per allowed slot.
    pub maintenance_durations: Vec<f64>,
    /// Workers needed to run the machine for one shift.
    pub workers_required: f64,
    /// Remaining useful life at the end of period 0 (candidates: 0).
    pub remaining_life_start: f64,
}

/// Upper bound on how many maintenances a machine can ever need: a plan that
/// asked for more would have exhausted the useful life already.
pub fn maintenance_count_bound(machine: &Machine) -> usize {
    let ratio = machine.useful_life / machine.maintenance_interval;
    ((ratio - 1e-9).ceil() as usize).max(1)
}

#[derive(Debug, Clone)]
pub struct Item {
    pub id: String,
    /// Demand per period, indexed over the simulated horizon.
    pub demand: Vec<f64>,
    pub initial_inventory: f64,
    /// Units per production hour on each machine; 0 means the machine
    /// cannot produce this item.
    pub production_rate: Vec<f64>,
    /// CO2 tons emitted per unit produced on each machine.
    pub production_emission: Vec<f64>,
    /// CO2 tons emitted per unit held per period.
    pub holding_emission: f64,
}

#[derive(Debug, Clone)]
pub struct Technology {
    pub id: String,
    /// Indices into `Instance::machines`.
    pub machines: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Horizon {
    /// Decision periods reported on (the leading slice of the simulation).
    pub periods: usize,
    /// Periods actually modeled; the tail beyond `periods` absorbs
    /// end-of-horizon distortion and is discarded from reports.
    pub simulated_periods: usize,
    /// Working hours per shift per period.
    pub shift_length: f64,
    /// Shift counts the site may run (subset of 0..=3).
    pub allowed_shifts: Vec<u8>,
    /// System-wide shift count in period 0.
    pub initial_shifts: u8,
}

#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    /// Include preventive maintenance decisions and constraints.
    pub maintenance: bool,
    /// Pin the site to exactly one work shift every period.
    pub single_shift: bool,
    /// Validate that the carbon-tax trajectory never decreases.
    pub increasing_tax: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            maintenance: true,
            single_shift: false,
            increasing_tax: true,
        }
    }
}

/// Base-period cost values plus the discount rate that spreads them over the
/// horizon. The carbon tax is a full per-period trajectory.
#[derive(Debug, Clone)]
pub struct CostSchedule {
    /// Per-period decline applied as `C_t = C_1 (1 + rate)^(1 - t)`.
    pub discount_rate: f64,
    /// Purchase price per machine.
    pub investment: Vec<f64>,
    /// Per-unit production cost, `[item][machine]`.
    pub production: Vec<Vec<f64>>,
    /// Cost of the w-th maintenance, `[machine][slot]`.
    pub maintenance: Vec<Vec<f64>>,
    /// Per-worker labor cost per shift-period, per machine.
    pub labor: Vec<f64>,
    /// Per-worker hiring / firing cost, per machine.
    pub hiring: Vec<f64>,
    pub firing: Vec<f64>,
    /// Cost of opening / closing shift level s, indexed 0..=3.
    pub shift_opening: [f64; 4],
    pub shift_closing: [f64; 4],
    /// Per-unit-period holding cost per item.
    pub holding: Vec<f64>,
    /// Money per CO2 ton, explicit per simulated period.
    pub carbon_tax: Vec<f64>,
    /// Salvage revenue per remaining useful-life hour, per machine.
    pub salvage_rate: Vec<f64>,
}

/// Per-period cost tables derived from a [`CostSchedule`].
#[derive(Debug, Clone)]
pub struct CostTables {
    pub investment: Vec<Vec<f64>>,
    pub production: Vec<Vec<Vec<f64>>>,
    pub maintenance: Vec<Vec<Vec<f64>>>,
    pub labor: Vec<Vec<f64>>,
    pub hiring: Vec<Vec<f64>>,
    pub firing: Vec<Vec<f64>>,
    pub shift_opening: Vec<Vec<f64>>,
    pub shift_closing: Vec<Vec<f64>>,
    pub holding: Vec<Vec<f64>>,
    pub carbon_tax: Vec<f64>,
    pub salvage_rate: Vec<Vec<f64>>,
}

/// Spreads a base-period value over `periods` with the declining factor.
pub fn discounted_series(base: f64, rate: f64, periods: usize) -> Vec<f64> {
    (0..periods)
        .map(|t0| base * (1.0 + rate).powi(-(t0 as i32)))
        .collect()
}

impl CostSchedule {
    fn derive_tables(&self, periods: usize) -> CostTables {
        let series = |base: f64| discounted_series(base, self.discount_rate, periods);
        CostTables {
            investment: self.investment.iter().map(|&c| series(c)).collect(),
            production: self
                .production
                .iter()
                .map(|per_machine| per_machine.iter().map(|&c| series(c)).collect())
                .collect(),
            maintenance: self
                .maintenance
                .iter()
                .map(|per_slot| per_slot.iter().map(|&c| series(c)).collect())
                .collect(),
            labor: self.labor.iter().map(|&c| series(c)).collect(),
            hiring: self.hiring.iter().map(|&c| series(c)).collect(),
            firing: self.firing.iter().map(|&c| series(c)).collect(),
            shift_opening: self.shift_opening.iter().map(|&c| series(c)).collect(),
            shift_closing: self.shift_closing.iter().map(|&c| series(c)).collect(),
            holding: self.holding.iter().map(|&c| series(c)).collect(),
            carbon_tax: self.carbon_tax.clone(),
            salvage_rate: self.salvage_rate.iter().map(|&c| series(c)).collect(),
        }
    }
}

/// A fully validated planning problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub horizon: Horizon,
    pub machines: Vec<Machine>,
    pub items: Vec<Item>,
    pub technologies: Vec<Technology>,
    pub costs: CostSchedule,
    pub tables: CostTables,
    pub options: ModelOptions,
}

impl Instance {
    /// Validates the raw parts and derives the per-period cost tables.
    ///
    /// Every violated invariant is reported, not just the first.
    pub fn new(
        horizon: Horizon,
        machines: Vec<Machine>,
        items: Vec<Item>,
        technology_ids: Vec<String>,
        costs: CostSchedule,
        options: ModelOptions,
    ) -> Result<Instance> {
        let mut violations = Vec::new();
        let mut push = |msg: String| violations.push(msg);

        // Horizon.
        if horizon.periods == 0 {
            push("horizon: periods must be at least 1".into());
        }
        if horizon.simulated_periods < horizon.periods {
            push(format!(
                "horizon: simulated_periods ({}) must be >= periods ({})",
                horizon.simulated_periods, horizon.periods
            ));
        }
        if !(horizon.shift_length > 0.0) {
            push("horizon: shift length l must be positive".into());
        }
        if horizon.allowed_shifts.is_empty() {
            push("horizon: allowed_shifts must not be empty".into());
        }
        for &s in &horizon.allowed_shifts {
            if s > 3 {
                push(format!("horizon: allowed shift count {s} out of range 0..=3"));
            }
        }
        if horizon.initial_shifts > 3 {
            push(format!(
                "horizon: initial shift count s0 = {} out of range 0..=3",
                horizon.initial_shifts
            ));
        }
        if options.single_shift && !horizon.allowed_shifts.contains(&1) {
            push("options: single_shift requires shift count 1 to be allowed".into());
        }

        // Machines.
        if machines.is_empty() {
            push("machines: at least one machine is required".into());
        }
        for (k, m) in machines.iter().enumerate() {
            if m.id.is_empty() {
                push(format!("machine #{k}: empty id"));
            }
            if machines[..k].iter().any(|other| other.id == m.id) {
                push(format!("machine {}: duplicate id", m.id));
            }
            if !(m.useful_life > 0.0) {
                push(format!("machine {}: useful life v must be positive", m.id));
            }
            if !(m.max_utilization > 0.0 && m.max_utilization <= 1.0) {
                push(format!(
                    "machine {}: utilization mu = {} must lie in (0, 1]",
                    m.id, m.max_utilization
                ));
            }
            if !(m.maintenance_interval > 0.0 && m.maintenance_interval <= m.useful_life) {
                push(format!(
                    "machine {}: maintenance interval FTM = {} must lie in (0, v]",
                    m.id, m.maintenance_interval
                ));
            }
            if m.maintenance_durations.iter().any(|&d| d < 0.0) {
                push(format!("machine {}: maintenance durations must be >= 0", m.id));
            }
            if m.maintenance_interval > 0.0 && m.useful_life > 0.0 {
                let want = maintenance_count_bound(m);
                if m.maintenance_durations.len() != want {
                    push(format!(
                        "machine {}: expected {} maintenance durations (ceil(v / FTM)), got {}",
                        m.id,
                        want,
                        m.maintenance_durations.len()
                    ));
                }
            }
            if m.workers_required < 0.0 {
                push(format!("machine {}: workers O must be >= 0", m.id));
            }
            if m.remaining_life_start < 0.0 {
                push(format!("machine {}: remaining life RL0 must be >= 0", m.id));
            }
            match m.pool {
                MachinePool::Candidate => {
                    if m.remaining_life_start != 0.0 {
                        push(format!(
                            "machine {}: candidate machines start with zero remaining life, got RL0 = {}",
                            m.id, m.remaining_life_start
                        ));
                    }
                    if m.initial_state != 0 {
                        push(format!(
                            "machine {}: candidate machines start in state 0, got s0 = {}",
                            m.id, m.initial_state
                        ));
                    }
                }
                MachinePool::Existing => {
                    if m.initial_state == 0 || m.initial_state > 3 {
                        push(format!(
                            "machine {}: existing machines must start in state 1..=3, got s0 = {}",
                            m.id, m.initial_state
                        ));
                    } else if m.initial_state != horizon.initial_shifts {
                        push(format!(
                            "machine {}: initial state {} conflicts with the system shift count s0 = {}",
                            m.id, m.initial_state, horizon.initial_shifts
                        ));
                    }
                }
            }
        }

        // Technologies partition the machine set.
        let mut technologies: Vec<Technology> = Vec::new();
        for id in &technology_ids {
            if technologies.iter().any(|t| &t.id == id) {
                push(format!("technology {id}: duplicate id"));
                continue;
            }
            technologies.push(Technology {
                id: id.clone(),
                machines: Vec::new(),
            });
        }
        for (k, m) in machines.iter().enumerate() {
            match technologies.iter_mut().find(|t| t.id == m.technology) {
                Some(t) => t.machines.push(k),
                None => push(format!(
                    "machine {}: unknown technology '{}'",
                    m.id, m.technology
                )),
            }
        }
        for t in &technologies {
            if t.machines.is_empty() {
                push(format!("technology {}: no member machines", t.id));
            }
        }

        // Items.
        if items.is_empty() {
            push("items: at least one item is required".into());
        }
        for (i, item) in items.iter().enumerate() {
            if item.id.is_empty() {
                push(format!("item #{i}: empty id"));
            }
            if items[..i].iter().any(|other| other.id == item.id) {
                push(format!("item {}: duplicate id", item.id));
            }
            if item.demand.len() != horizon.simulated_periods {
                push(format!(
                    "item {}: demand has {} entries, expected one per simulated period ({})",
                    item.id,
                    item.demand.len(),
                    horizon.simulated_periods
                ));
            }
            if item.demand.iter().any(|&d| d < 0.0 || !d.is_finite()) {
                push(format!("item {}: demand values must be finite and >= 0", item.id));
            }
            if item.initial_inventory < 0.0 {
                push(format!("item {}: initial inventory I0 must be >= 0", item.id));
            }
            if item.holding_emission < 0.0 {
                push(format!("item {}: holding emission eh must be >= 0", item.id));
            }
            if item.production_rate.len() != machines.len()
                || item.production_emission.len() != machines.len()
            {
                push(format!(
                    "item {}: production rate/emission must have one entry per machine",
                    item.id
                ));
                continue;
            }
            if item.production_rate.iter().any(|&r| r < 0.0) {
                push(format!("item {}: production rates r must be >= 0", item.id));
            }
            if item.production_emission.iter().any(|&e| e < 0.0) {
                push(format!("item {}: production emissions ep must be >= 0", item.id));
            }
            let has_producer = item.production_rate.iter().any(|&r| r > 0.0);
            if !has_producer && item.demand.iter().any(|&d| d > 0.0) {
                push(format!(
                    "item {}: has positive demand but no machine with r > 0",
                    item.id
                ));
            }
        }

        // Costs.
        if !(costs.discount_rate > -1.0) {
            push("costs: discount rate must exceed -1".into());
        }
        let check_len = |name: &str, got: usize, want: usize, push: &mut dyn FnMut(String)| {
            if got != want {
                push(format!("costs: {name} has {got} entries, expected {want}"));
            }
        };
        check_len("CI", costs.investment.len(), machines.len(), &mut push);
        check_len("CP", costs.production.len(), items.len(), &mut push);
        for (i, row) in costs.production.iter().enumerate() {
            if row.len() != machines.len() {
                push(format!(
                    "costs: CP for item #{i} has {} entries, expected one per machine",
                    row.len()
                ));
            }
        }
        check_len("CM", costs.maintenance.len(), machines.len(), &mut push);
        for (k, row) in costs.maintenance.iter().enumerate() {
            if k < machines.len() {
                let want = maintenance_count_bound(&machines[k]);
                if row.len() != want {
                    push(format!(
                        "costs: CM for machine {} has {} entries, expected {}",
                        machines[k].id,
                        row.len(),
                        want
                    ));
                }
            }
        }
        check_len("CL", costs.labor.len(), machines.len(), &mut push);
        check_len("CA", costs.hiring.len(), machines.len(), &mut push);
        check_len("CF", costs.firing.len(), machines.len(), &mut push);
        check_len("CH", costs.holding.len(), items.len(), &mut push);
        check_len("alpha", costs.salvage_rate.len(), machines.len(), &mut push);
        check_len(
            "CT",
            costs.carbon_tax.len(),
            horizon.simulated_periods,
            &mut push,
        );
        let all_cost_values = costs
            .investment
            .iter()
            .chain(costs.labor.iter())
            .chain(costs.hiring.iter())
            .chain(costs.firing.iter())
            .chain(costs.holding.iter())
            .chain(costs.salvage_rate.iter())
            .chain(costs.carbon_tax.iter())
            .chain(costs.shift_opening.iter())
            .chain(costs.shift_closing.iter())
            .chain(costs.production.iter().flatten())
            .chain(costs.maintenance.iter().flatten());
        if all_cost_values.into_iter().any(|&c| c < 0.0 || !c.is_finite()) {
            push("costs: all cost values must be finite and >= 0".into());
        }
        if options.increasing_tax {
            if costs
                .carbon_tax
                .windows(2)
                .any(|w| w[1] < w[0] - 1e-12)
            {
                push("costs: CT must be non-decreasing under an increasing-tax policy".into());
            }
        }

        if !violations.is_empty() {
            return Err(Error::validation(violations));
        }

        let tables = costs.derive_tables(horizon.simulated_periods);
        Ok(Instance {
            horizon,
            machines,
            items,
            technologies,
            costs,
            tables,
            options,
        })
    }

    /// Re-derives the cost tables from the stored base values. Construction
    /// already did this; calling it again must change nothing.
    pub fn regenerate_tables(&mut self) {
        self.tables = self.costs.derive_tables(self.horizon.simulated_periods);
    }

    pub fn machine_index(&self, id: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.id == id)
    }

    pub fn technology_index(&self, id: &str) -> Option<usize> {
        self.technologies.iter().position(|t| t.id == id)
    }

    /// Technology index for a machine index.
    pub fn technology_of(&self, machine: usize) -> usize {
        self.technologies
            .iter()
            .position(|t| t.machines.contains(&machine))
            .expect("validated instance: machine belongs to a technology")
    }

    /// Collapses all items into one equivalent product scaled by `xi`.
    ///
    /// The aggregate demand is `xi` times the summed per-period demand.
    /// Rates, unit costs and emissions are averaged with first-period demand
    /// shares as weights. The result disables maintenance and pins the site
    /// to a single shift, which is the intended regime for scenario sweeps.
    pub fn aggregate_to_single_product(&self, xi: f64) -> Result<Instance> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "aggregation scale must be positive, got {xi}"
            )));
        }
        let first_total: f64 = self.items.iter().map(|i| i.demand[0]).sum();
        if !(first_total > 0.0) {
            return Err(Error::InvalidArgument(
                "aggregation requires positive first-period demand".into(),
            ));
        }
        let weights: Vec<f64> = self
            .items
            .iter()
            .map(|i| i.demand[0] / first_total)
            .collect();
        let weighted = |per_item: &dyn Fn(usize) -> f64| -> f64 {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * per_item(i))
                .sum()
        };

        let demand: Vec<f64> = (0..self.horizon.simulated_periods)
            .map(|t| xi * self.items.iter().map(|i| i.demand[t]).sum::<f64>())
            .collect();
        let n_machines = self.machines.len();
        let item = Item {
            id: "aggregate".into(),
            demand,
            initial_inventory: self.items.iter().map(|i| i.initial_inventory).sum(),
            production_rate: (0..n_machines)
                .map(|k| weighted(&|i| self.items[i].production_rate[k]))
                .collect(),
            production_emission: (0..n_machines)
                .map(|k| weighted(&|i| self.items[i].production_emission[k]))
                .collect(),
            holding_emission: weighted(&|i| self.items[i].holding_emission),
        };

        let mut costs = self.costs.clone();
        costs.production = vec![(0..n_machines)
            .map(|k| weighted(&|i| self.costs.production[i][k]))
            .collect()];
        costs.holding = vec![weighted(&|i| self.costs.holding[i])];

        let options = ModelOptions {
            maintenance: false,
            single_shift: true,
            increasing_tax: self.options.increasing_tax,
        };
        Instance::new(
            self.horizon.clone(),
            self.machines.clone(),
            vec![item],
            self.technologies.iter().map(|t| t.id.clone()).collect(),
            costs,
            options,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maintenance_bound_examples() {
        let mut m = appendix::test_machine();
        m.useful_life = 20000.0;
        m.maintenance_interval = 5000.0;
        assert_eq!(maintenance_count_bound(&m), 4);
        m.useful_life = 100.0;
        m.maintenance_interval = 100.0;
        assert_eq!(maintenance_count_bound(&m), 1);
        m.useful_life = 100.0;
        m.maintenance_interval = 30.0;
        assert_eq!(maintenance_count_bound(&m), 4);
    }

    #[test]
    fn maintenance_bound_matches_simulated_exhaustion() {
        // Independent check: run the machine at full tilt and count how many
        // maintenance windows fit before the useful life runs out.
        for (v, ftm) in [(20000.0, 5000.0), (100.0, 30.0), (7.0, 2.0), (1.0, 1.0)] {
            let mut used = 0.0;
            let mut windows = 0;
            while used < v - 1e-9 {
                used += f64::min(ftm, v - used);
                windows += 1;
            }
            let mut m = appendix::test_machine();
            m.useful_life = v;
            m.maintenance_interval = ftm;
            assert_eq!(maintenance_count_bound(&m), windows, "v={v} ftm={ftm}");
        }
    }

    #[test]
    fn discount_series_follows_declining_rule() {
        let series = discounted_series(4500.0, 0.10, 4);
        assert_eq!(series[0], 4500.0);
        for (t0, value) in series.iter().enumerate() {
            let expected = 4500.0 * (1.1f64).powi(-(t0 as i32));
            assert!((value - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn table_regeneration_is_idempotent() {
        let mut inst = appendix_example();
        let before = format!("{:?}", inst.tables);
        inst.regenerate_tables();
        inst.regenerate_tables();
        assert_eq!(before, format!("{:?}", inst.tables));
    }

    #[test]
    fn rejects_bad_utilization() {
        let mut inst = appendix_example();
        let mut machines = inst.machines.clone();
        machines[0].max_utilization = 0.0;
        let result = Instance::new(
            inst.horizon.clone(),
            machines,
            std::mem::take(&mut inst.items),
            inst.technologies.iter().map(|t| t.id.clone()).collect(),
            inst.costs.clone(),
            inst.options,
        );
        let err = result.unwrap_err();
        assert!(err.to_string().contains("mu"));
    }

    #[test]
    fn rejects_candidate_with_remaining_life() {
        let mut inst = appendix_example();
        let mut machines = inst.machines.clone();
        machines[0].remaining_life_start = 5.0;
        let result = Instance::new(
            inst.horizon.clone(),
            machines,
            std::mem::take(&mut inst.items),
            inst.technologies.iter().map(|t| t.id.clone()).collect(),
            inst.costs.clone(),
            inst.options,
        );
        let err = result.unwrap_err();
        assert!(err.to_string().contains("zero remaining life"));
    }

    #[test]
    fn aggregation_preserves_total_demand_at_unit_scale() {
        let base = appendix_example();
        let agg = base.aggregate_to_single_product(1.0).unwrap();
        assert_eq!(agg.items.len(), 1);
        for t in 0..base.horizon.simulated_periods {
            let total: f64 = base.items.iter().map(|i| i.demand[t]).sum();
            assert_eq!(agg.items[0].demand[t], total);
        }
        assert!(!agg.options.maintenance);
        assert!(agg.options.single_shift);
    }

    #[test]
    fn aggregation_scales_and_rejects_nonpositive_xi() {
        let base = appendix_example();
        let agg = base.aggregate_to_single_product(1.0).unwrap();
        assert!((agg.items[0].demand[0] - 200_000.0).abs() < 1e-9);
        let small = base.aggregate_to_single_product(0.05).unwrap();
        assert!((small.items[0].demand[0] - 10_000.0).abs() < 1e-9);
        assert!(base.aggregate_to_single_product(0.0).is_err());
        assert!(base.aggregate_to_single_product(-1.0).is_err());
    }
}
