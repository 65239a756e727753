//! Translation of an [`Instance`] into a sparse MILP and back.
//!
//! [`build`] produces the full model in either variant: `Spt` prices
//! emissions through the carbon-tax trajectory, `Spwt` drops that objective
//! term (and nothing else), which makes it a relaxation of the taxed model.
//! [`MilpModel::decode`] turns a raw solution vector back into a [`Plan`]
//! after re-checking every constraint row.
//!
//! Production and inventory columns are scaled to thousands of units
//! internally so that coefficient magnitudes stay within a narrow band;
//! decoding restores natural units.

mod build;

pub use build::build;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::statespace::{Transition, TransitionClass, STATE_COUNT, TRANSITION_COUNT};

/// Model variant: with the carbon-tax cost term (`Spt`) or without (`Spwt`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Spt,
    Spwt,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Spt => write!(f, "spt"),
            Variant::Spwt => write!(f, "spwt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// Semantic identity of a column; period indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarRole {
    MachineTransition { machine: usize, transition: Transition, period: usize },
    ShiftLevel { shifts: u8, period: usize },
    ShiftOpened { shifts: u8, period: usize },
    ShiftClosed { shifts: u8, period: usize },
    Production { item: usize, machine: usize, period: usize },
    Inventory { item: usize, period: usize },
    Maintenance { slot: usize, machine: usize, period: usize },
    MaintenanceClock { machine: usize, period: usize },
    RemainingLife { machine: usize, period: usize },
    SalvageLife { machine: usize, period: usize },
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Constraint families, one per structural group of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFamily {
    TransitionContinuity,
    SingleTransition,
    BuyOnce,
    InitialExisting,
    InitialCandidate,
    ShiftLevelChoice,
    ShiftLink,
    ShiftOpenLink,
    ShiftCloseLink,
    DemandBalance,
    MaintenanceClock,
    MaintenanceClockCap,
    MaintenanceOrder,
    MaintenanceOnce,
    MaintenanceNeedsOperation,
    Capacity,
    LifeUsageCap,
    LifeBalance,
    SalvageDiscardCap,
    SalvageLifeCap,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    /// Sparse coefficients sorted by variable index.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// How far the row is from being satisfied (0 when feasible).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Tolerance for accepting a binary value as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Absolute row-feasibility tolerance on scaled data.
pub const ROW_TOL: f64 = 1e-6;
/// Internal scale for production/inventory columns (units per scaled unit).
pub const QUANTITY_SCALE: f64 = 1000.0;

/// Column lookup tables for the model; `None` marks combinations that have
/// no variable (an item a machine cannot produce, maintenance when disabled).
#[derive(Debug, Clone, Default)]
pub(crate) struct VarIndex {
    pub machines: usize,
    pub periods: usize,
    pub slots: Vec<usize>,
    pub transition: Vec<usize>,                // [k][t][e]
    pub shift_level: Vec<usize>,               // [s][t]
    pub shift_opened: Vec<usize>,              // [s][t]
    pub shift_closed: Vec<usize>,              // [s][t]
    pub production: Vec<Option<usize>>,        // [i][k][t]
    pub inventory: Vec<usize>,                 // [i][t]
    pub maintenance: Vec<Option<usize>>,       // [k][w][t] with w < slots[k]
    pub maintenance_offsets: Vec<usize>,       // prefix sums of slots * periods
    pub clock: Vec<Option<usize>>,             // [k][t]
    pub remaining_life: Vec<usize>,            // [k][t]
    pub salvage_life: Vec<usize>,              // [k][t]
}

impl VarIndex {
    pub fn x(&self, k: usize, t: usize, e: Transition) -> usize {
        self.transition[(k * self.periods + t) * TRANSITION_COUNT + e.index()]
    }
    pub fn z(&self, s: usize, t: usize) -> usize {
        self.shift_level[s * self.periods + t]
    }
    pub fn opened(&self, s: usize, t: usize) -> usize {
        self.shift_opened[s * self.periods + t]
    }
    pub fn closed(&self, s: usize, t: usize) -> usize {
        self.shift_closed[s * self.periods + t]
    }
    pub fn y(&self, i: usize, k: usize, t: usize) -> Option<usize> {
        self.production[(i * self.machines + k) * self.periods + t]
    }
    pub fn inv(&self, i: usize, t: usize) -> usize {
        self.inventory[i * self.periods + t]
    }
    pub fn m(&self, k: usize, w: usize, t: usize) -> Option<usize> {
        self.maintenance[self.maintenance_offsets[k] + w * self.periods + t]
    }
    pub fn tm(&self, k: usize, t: usize) -> Option<usize> {
        self.clock[k * self.periods + t]
    }
    pub fn rl(&self, k: usize, t: usize) -> usize {
        self.remaining_life[k * self.periods + t]
    }
    pub fn rf(&self, k: usize, t: usize) -> usize {
        self.salvage_life[k * self.periods + t]
    }
}

/// A sparse MILP plus the context needed to interpret its solutions.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variant: Variant,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Dense objective, minimization.
    pub objective: Vec<f64>,
    pub(crate) idx: VarIndex,
    instance: Instance,
}

impl MilpModel {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn binary_count(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    /// Index of the variable with the given semantic role, if the model
    /// has one (linear scan; intended for tests and tooling).
    pub fn variable_index(&self, role: VarRole) -> Option<usize> {
        self.variables.iter().position(|v| v.role == role)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Checks bounds, integrality and every row at the decode tolerances.
    /// Returns the worst offender's description on failure.
    pub fn check_vector(&self, values: &[f64]) -> std::result::Result<(), String> {
        if values.len() != self.variables.len() {
            return Err(format!(
                "vector has {} entries, model has {} variables",
                values.len(),
                self.variables.len()
            ));
        }
        // Integrality violations outrank everything: a fractional binary is
        // rejected as such even when it also knocks rows over.
        let mut worst_fractional: Option<(f64, String)> = None;
        let mut worst: Option<(f64, String)> = None;
        for (var, &x) in self.variables.iter().zip(values) {
            if !x.is_finite() {
                return Err(format!("variable {} has non-finite value {x}", var.name));
            }
            if var.kind == VarKind::Binary {
                let frac = (x - x.round()).abs();
                if frac > INTEGRALITY_TOL
                    && frac > worst_fractional.as_ref().map_or(0.0, |w| w.0)
                {
                    worst_fractional = Some((
                        frac,
                        format!("binary variable {} = {x} is fractional", var.name),
                    ));
                }
            }
            let bound_violation = (var.lower - x).max(x - var.upper).max(0.0);
            if bound_violation > ROW_TOL
                && bound_violation > worst.as_ref().map_or(0.0, |w| w.0)
            {
                worst = Some((
                    bound_violation,
                    format!(
                        "variable {} = {x} outside bounds [{}, {}]",
                        var.name, var.lower, var.upper
                    ),
                ));
            }
        }
        if let Some((_, desc)) = worst_fractional {
            return Err(desc);
        }
        for row in &self.rows {
            let violation = row.violation(values);
            if violation > ROW_TOL && violation > worst.as_ref().map_or(0.0, |w| w.0) {
                worst = Some((
                    violation,
                    format!("row {} violated by {violation:.3e}", row.name),
                ));
            }
        }
        match worst {
            Some((_, desc)) => Err(desc),
            None => Ok(()),
        }
    }

    /// Decodes a feasible solution vector into a [`Plan`].
    pub fn decode(&self, values: &[f64]) -> Result<Plan> {
        self.check_vector(values)
            .map_err(Error::SolutionRejected)?;

        let inst = &self.instance;
        let periods = inst.horizon.simulated_periods;
        let n_machines = inst.machines.len();
        let n_items = inst.items.len();

        let transitions: Vec<Vec<Transition>> = (0..n_machines)
            .map(|k| {
                (0..periods)
                    .map(|t| {
                        Transition::all()
                            .max_by(|a, b| {
                                values[self.idx.x(k, t, *a)]
                                    .total_cmp(&values[self.idx.x(k, t, *b)])
                            })
                            .expect("sixteen transitions")
                    })
                    .collect()
            })
            .collect();

        let shift_counts: Vec<u8> = (0..periods)
            .map(|t| {
                (0..STATE_COUNT)
                    .max_by(|&a, &b| {
                        values[self.idx.z(a, t)].total_cmp(&values[self.idx.z(b, t)])
                    })
                    .unwrap() as u8
            })
            .collect();

        let shifts_opened: Vec<[bool; 4]> = (0..periods)
            .map(|t| std::array::from_fn(|s| values[self.idx.opened(s, t)] > 0.5))
            .collect();
        let shifts_closed: Vec<[bool; 4]> = (0..periods)
            .map(|t| std::array::from_fn(|s| values[self.idx.closed(s, t)] > 0.5))
            .collect();

        let production: Vec<Vec<Vec<f64>>> = (0..n_items)
            .map(|i| {
                (0..n_machines)
                    .map(|k| {
                        (0..periods)
                            .map(|t| match self.idx.y(i, k, t) {
                                Some(j) => QUANTITY_SCALE * values[j],
                                None => 0.0,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let inventory: Vec<Vec<f64>> = (0..n_items)
            .map(|i| {
                (0..periods)
                    .map(|t| QUANTITY_SCALE * values[self.idx.inv(i, t)])
                    .collect()
            })
            .collect();

        let maintenance: Vec<Vec<Vec<bool>>> = (0..n_machines)
            .map(|k| {
                (0..self.idx.slots[k])
                    .map(|w| {
                        (0..periods)
                            .map(|t| {
                                self.idx
                                    .m(k, w, t)
                                    .map_or(false, |j| values[j] > 0.5)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let per_machine_series = |get: &dyn Fn(usize, usize) -> Option<usize>| -> Vec<Vec<f64>> {
            (0..n_machines)
                .map(|k| {
                    (0..periods)
                        .map(|t| get(k, t).map_or(0.0, |j| values[j]))
                        .collect()
                })
                .collect()
        };
        let maintenance_clock = per_machine_series(&|k, t| self.idx.tm(k, t));
        let remaining_life = per_machine_series(&|k, t| Some(self.idx.rl(k, t)));
        let salvage_life = per_machine_series(&|k, t| Some(self.idx.rf(k, t)));

        let objective = self.objective_value(values);
        let breakdown = self.breakdown(values);
        debug_assert!((breakdown.total() - objective).abs() <= 1e-6 * objective.abs().max(1.0));

        Ok(Plan {
            variant: self.variant,
            transitions,
            shift_counts,
            shifts_opened,
            shifts_closed,
            production,
            inventory,
            maintenance,
            maintenance_clock,
            remaining_life,
            salvage_life,
            objective,
            breakdown,
            raw: values.to_vec(),
        })
    }

    /// Groups the objective dot product by cost family. Uses the raw vector
    /// so the components sum to the objective up to float reassociation.
    fn breakdown(&self, values: &[f64]) -> CostBreakdown {
        let inst = &self.instance;
        let tables = &inst.tables;
        let mut b = CostBreakdown::default();
        for (var, &x) in self.variables.iter().zip(values) {
            if x == 0.0 {
                continue;
            }
            match var.role {
                VarRole::MachineTransition { machine, transition, period } => {
                    let workers = inst.machines[machine].workers_required;
                    if transition.classify() == TransitionClass::Purchase {
                        b.investment += tables.investment[machine][period] * x;
                    }
                    b.labor +=
                        transition.head() as f64 * tables.labor[machine][period] * workers * x;
                    b.hiring += transition.shifts_opened() as f64
                        * tables.hiring[machine][period]
                        * workers
                        * x;
                    b.firing += transition.shifts_closed() as f64
                        * tables.firing[machine][period]
                        * workers
                        * x;
                }
                VarRole::ShiftOpened { shifts, period } => {
                    b.shift_changes += tables.shift_opening[shifts as usize][period] * x;
                }
                VarRole::ShiftClosed { shifts, period } => {
                    b.shift_changes += tables.shift_closing[shifts as usize][period] * x;
                }
                VarRole::Production { item, machine, period } => {
                    let units = QUANTITY_SCALE * x;
                    b.production += tables.production[item][machine][period] * units;
                    if self.variant == Variant::Spt {
                        b.carbon_tax += tables.carbon_tax[period]
                            * inst.items[item].production_emission[machine]
                            * units;
                    }
                }
                VarRole::Inventory { item, period } => {
                    let units = QUANTITY_SCALE * x;
                    b.holding += tables.holding[item][period] * units;
                    if self.variant == Variant::Spt {
                        b.carbon_tax += tables.carbon_tax[period]
                            * inst.items[item].holding_emission
                            * units;
                    }
                }
                VarRole::Maintenance { slot, machine, period } => {
                    b.maintenance += tables.maintenance[machine][slot][period] * x;
                }
                VarRole::SalvageLife { machine, period } => {
                    b.salvage_revenue += tables.salvage_rate[machine][period] * x;
                }
                VarRole::ShiftLevel { .. }
                | VarRole::MaintenanceClock { .. }
                | VarRole::RemainingLife { .. } => {}
            }
        }
        b
    }
}

/// A decoded feasible solution in natural units.
#[derive(Debug, Clone)]
pub struct Plan {
    pub variant: Variant,
    /// Realized transition per machine and period.
    pub transitions: Vec<Vec<Transition>>,
    /// System-wide shift count per period.
    pub shift_counts: Vec<u8>,
    pub shifts_opened: Vec<[bool; 4]>,
    pub shifts_closed: Vec<[bool; 4]>,
    /// Units produced, `[item][machine][period]`.
    pub production: Vec<Vec<Vec<f64>>>,
    /// Units held at period end, `[item][period]`.
    pub inventory: Vec<Vec<f64>>,
    /// Maintenance executions, `[machine][slot][period]`.
    pub maintenance: Vec<Vec<Vec<bool>>>,
    /// Hours since last maintenance at period start, `[machine][period]`.
    pub maintenance_clock: Vec<Vec<f64>>,
    /// Remaining useful life in hours, `[machine][period]`.
    pub remaining_life: Vec<Vec<f64>>,
    /// Salvaged life hours credited on discard, `[machine][period]`.
    pub salvage_life: Vec<Vec<f64>>,
    pub objective: f64,
    pub breakdown: CostBreakdown,
    /// The underlying solution vector in model (scaled) space.
    pub raw: Vec<f64>,
}

impl Plan {
    /// Total production hours machine `k` works in period `t`.
    pub fn machine_hours(&self, instance: &Instance, k: usize, t: usize) -> f64 {
        self.production
            .iter()
            .enumerate()
            .map(|(i, per_machine)| {
                let rate = instance.items[i].production_rate[k];
                if rate > 0.0 {
                    per_machine[k][t] / rate
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Objective components; `total` subtracts the salvage revenue.
#[derive(Debug, Clone, Copy, Default)]
pub struct CostBreakdown {
    pub investment: f64,
    pub production: f64,
    pub maintenance: f64,
    pub labor: f64,
    pub hiring: f64,
    pub firing: f64,
    pub shift_changes: f64,
    pub holding: f64,
    pub carbon_tax: f64,
    pub salvage_revenue: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.investment
            + self.production
            + self.maintenance
            + self.labor
            + self.hiring
            + self.firing
            + self.shift_changes
            + self.holding
            + self.carbon_tax
            - self.salvage_revenue
    }
}
