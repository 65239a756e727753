//! Assembles the MILP rows, bounds and objective from an instance.

use super::{
    MilpModel, Row, RowFamily, Sense, VarIndex, VarKind, VarRole, Variable, Variant,
    QUANTITY_SCALE,
};
use crate::instance::{maintenance_count_bound, Instance, MachinePool};
use crate::statespace::{Transition, TransitionClass, STATE_COUNT, TRANSITION_COUNT};

struct ModelBuilder {
    variables: Vec<Variable>,
    rows: Vec<Row>,
}

impl ModelBuilder {
    fn add_var(
        &mut self,
        name: String,
        lower: f64,
        upper: f64,
        kind: VarKind,
        role: VarRole,
    ) -> usize {
        self.variables.push(Variable {
            name,
            lower,
            upper,
            kind,
            role,
        });
        self.variables.len() - 1
    }

    fn add_row(
        &mut self,
        family: RowFamily,
        name: String,
        mut coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        coeffs.sort_unstable_by_key(|&(j, _)| j);
        coeffs.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            name,
            family,
            coeffs,
            sense,
            rhs,
        });
    }
}

/// Builds the capacity-planning MILP for `instance` in the given variant.
pub fn build(instance: &Instance, variant: Variant) -> MilpModel {
    let inst = instance.clone();
    let periods = inst.horizon.simulated_periods;
    let n_machines = inst.machines.len();
    let n_items = inst.items.len();
    let maintenance_on = inst.options.maintenance;
    let shift_length = inst.horizon.shift_length;

    let slots: Vec<usize> = inst
        .machines
        .iter()
        .map(|m| if maintenance_on { maintenance_count_bound(m) } else { 0 })
        .collect();

    let mut b = ModelBuilder {
        variables: Vec::new(),
        rows: Vec::new(),
    };

    // Machine transition indicators. First-period transitions whose tail
    // contradicts the machine's known period-0 state describe nothing and
    // are pinned at zero.
    let mut transition = vec![0usize; n_machines * periods * TRANSITION_COUNT];
    for (k, machine) in inst.machines.iter().enumerate() {
        for t in 0..periods {
            for e in Transition::all() {
                let upper = if t == 0 && e.tail() != machine.initial_state {
                    0.0
                } else {
                    1.0
                };
                let j = b.add_var(
                    format!("X({},e{},t{})", machine.id, e.index(), t + 1),
                    0.0,
                    upper,
                    VarKind::Binary,
                    VarRole::MachineTransition {
                        machine: k,
                        transition: e,
                        period: t,
                    },
                );
                transition[(k * periods + t) * TRANSITION_COUNT + e.index()] = j;
            }
        }
    }

    // Shift-level selection and open/close events. The single-shift option
    // and the allowed-shift set are imposed through bounds.
    let mut shift_level = vec![0usize; STATE_COUNT * periods];
    let mut shift_opened = vec![0usize; STATE_COUNT * periods];
    let mut shift_closed = vec![0usize; STATE_COUNT * periods];
    for s in 0..STATE_COUNT {
        let shifts = s as u8;
        let allowed = inst.horizon.allowed_shifts.contains(&shifts);
        for t in 0..periods {
            let (lo, hi) = if inst.options.single_shift {
                if s == 1 {
                    (1.0, 1.0)
                } else {
                    (0.0, 0.0)
                }
            } else if allowed {
                (0.0, 1.0)
            } else {
                (0.0, 0.0)
            };
            shift_level[s * periods + t] = b.add_var(
                format!("Z(s{s},t{})", t + 1),
                lo,
                hi,
                VarKind::Binary,
                VarRole::ShiftLevel { shifts, period: t },
            );
        }
    }
    for s in 0..STATE_COUNT {
        for t in 0..periods {
            shift_opened[s * periods + t] = b.add_var(
                format!("O(s{s},t{})", t + 1),
                0.0,
                1.0,
                VarKind::Binary,
                VarRole::ShiftOpened {
                    shifts: s as u8,
                    period: t,
                },
            );
        }
    }
    for s in 0..STATE_COUNT {
        for t in 0..periods {
            shift_closed[s * periods + t] = b.add_var(
                format!("C(s{s},t{})", t + 1),
                0.0,
                1.0,
                VarKind::Binary,
                VarRole::ShiftClosed {
                    shifts: s as u8,
                    period: t,
                },
            );
        }
    }

    // Maintenance executions.
    let mut maintenance_offsets = vec![0usize; n_machines + 1];
    for k in 0..n_machines {
        maintenance_offsets[k + 1] = maintenance_offsets[k] + slots[k] * periods;
    }
    let mut maintenance = vec![None; maintenance_offsets[n_machines]];
    for (k, machine) in inst.machines.iter().enumerate() {
        for w in 0..slots[k] {
            for t in 0..periods {
                let j = b.add_var(
                    format!("M(w{},{},t{})", w + 1, machine.id, t + 1),
                    0.0,
                    1.0,
                    VarKind::Binary,
                    VarRole::Maintenance {
                        slot: w,
                        machine: k,
                        period: t,
                    },
                );
                maintenance[maintenance_offsets[k] + w * periods + t] = Some(j);
            }
        }
    }

    // Production (scaled to thousands) for producible item-machine pairs.
    let mut production = vec![None; n_items * n_machines * periods];
    for (i, item) in inst.items.iter().enumerate() {
        for (k, machine) in inst.machines.iter().enumerate() {
            if item.production_rate[k] <= 0.0 {
                continue;
            }
            for t in 0..periods {
                let j = b.add_var(
                    format!("Y({},{},t{})", item.id, machine.id, t + 1),
                    0.0,
                    f64::INFINITY,
                    VarKind::Continuous,
                    VarRole::Production {
                        item: i,
                        machine: k,
                        period: t,
                    },
                );
                production[(i * n_machines + k) * periods + t] = Some(j);
            }
        }
    }

    // End-of-period inventory (scaled).
    let mut inventory = vec![0usize; n_items * periods];
    for (i, item) in inst.items.iter().enumerate() {
        for t in 0..periods {
            inventory[i * periods + t] = b.add_var(
                format!("I({},t{})", item.id, t + 1),
                0.0,
                f64::INFINITY,
                VarKind::Continuous,
                VarRole::Inventory { item: i, period: t },
            );
        }
    }

    // Maintenance clocks, remaining life, salvaged life.
    let mut clock = vec![None; n_machines * periods];
    if maintenance_on {
        for (k, machine) in inst.machines.iter().enumerate() {
            for t in 0..periods {
                let j = b.add_var(
                    format!("TM({},t{})", machine.id, t + 1),
                    0.0,
                    f64::INFINITY,
                    VarKind::Continuous,
                    VarRole::MaintenanceClock { machine: k, period: t },
                );
                clock[k * periods + t] = Some(j);
            }
        }
    }
    let mut remaining_life = vec![0usize; n_machines * periods];
    let mut salvage_life = vec![0usize; n_machines * periods];
    for (k, machine) in inst.machines.iter().enumerate() {
        for t in 0..periods {
            remaining_life[k * periods + t] = b.add_var(
                format!("RL({},t{})", machine.id, t + 1),
                0.0,
                f64::INFINITY,
                VarKind::Continuous,
                VarRole::RemainingLife { machine: k, period: t },
            );
        }
    }
    for (k, machine) in inst.machines.iter().enumerate() {
        for t in 0..periods {
            salvage_life[k * periods + t] = b.add_var(
                format!("RF({},t{})", machine.id, t + 1),
                0.0,
                f64::INFINITY,
                VarKind::Continuous,
                VarRole::SalvageLife { machine: k, period: t },
            );
        }
    }

    let idx = VarIndex {
        machines: n_machines,
        periods,
        slots: slots.clone(),
        transition,
        shift_level,
        shift_opened,
        shift_closed,
        production,
        inventory,
        maintenance,
        maintenance_offsets,
        clock,
        remaining_life,
        salvage_life,
    };

    // Hours per scaled production unit: QUANTITY_SCALE / r_ik.
    let hours: Vec<Vec<f64>> = inst
        .items
        .iter()
        .map(|item| {
            item.production_rate
                .iter()
                .map(|&r| if r > 0.0 { QUANTITY_SCALE / r } else { 0.0 })
                .collect()
        })
        .collect();

    // --- Transition structure ---

    // Continuity: what flows into a state at t must flow out at t+1.
    for (k, machine) in inst.machines.iter().enumerate() {
        for s in 0..STATE_COUNT as u8 {
            for t in 0..periods.saturating_sub(1) {
                let mut coeffs = Vec::new();
                for e in Transition::all() {
                    if e.tail() == s {
                        coeffs.push((idx.x(k, t + 1, e), 1.0));
                    }
                    if e.head() == s {
                        coeffs.push((idx.x(k, t, e), -1.0));
                    }
                }
                b.add_row(
                    RowFamily::TransitionContinuity,
                    format!("transition_continuity({},s{s},t{})", machine.id, t + 1),
                    coeffs,
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }

    // Exactly one transition per period after the first.
    for (k, machine) in inst.machines.iter().enumerate() {
        for t in 1..periods {
            let coeffs = Transition::all().map(|e| (idx.x(k, t, e), 1.0)).collect();
            b.add_row(
                RowFamily::SingleTransition,
                format!("single_transition({},t{})", machine.id, t + 1),
                coeffs,
                Sense::Eq,
                1.0,
            );
        }
    }

    // Candidates can be purchased at most once over the horizon.
    for (k, machine) in inst.machines.iter().enumerate() {
        if machine.pool != MachinePool::Candidate {
            continue;
        }
        let mut coeffs = Vec::new();
        for t in 0..periods {
            for e in Transition::all() {
                if e.classify() == TransitionClass::Purchase {
                    coeffs.push((idx.x(k, t, e), 1.0));
                }
            }
        }
        b.add_row(
            RowFamily::BuyOnce,
            format!("buy_once({})", machine.id),
            coeffs,
            Sense::Le,
            1.0,
        );
    }

    // First-period transitions must leave the known initial state.
    for (k, machine) in inst.machines.iter().enumerate() {
        match machine.pool {
            MachinePool::Existing => {
                let coeffs = Transition::all()
                    .filter(|e| {
                        matches!(
                            e.classify(),
                            TransitionClass::Operating | TransitionClass::Discard
                        ) && e.tail() == machine.initial_state
                    })
                    .map(|e| (idx.x(k, 0, e), 1.0))
                    .collect();
                b.add_row(
                    RowFamily::InitialExisting,
                    format!("initial_existing({})", machine.id),
                    coeffs,
                    Sense::Eq,
                    1.0,
                );
            }
            MachinePool::Candidate => {
                let coeffs = Transition::all()
                    .filter(|e| {
                        matches!(
                            e.classify(),
                            TransitionClass::Inoperative | TransitionClass::Purchase
                        )
                    })
                    .map(|e| (idx.x(k, 0, e), 1.0))
                    .collect();
                b.add_row(
                    RowFamily::InitialCandidate,
                    format!("initial_candidate({})", machine.id),
                    coeffs,
                    Sense::Eq,
                    1.0,
                );
            }
        }
    }

    // --- Work shifts ---

    // Exactly one shift level per period.
    for t in 0..periods {
        let coeffs = (0..STATE_COUNT).map(|s| (idx.z(s, t), 1.0)).collect();
        b.add_row(
            RowFamily::ShiftLevelChoice,
            format!("shift_level_choice(t{})", t + 1),
            coeffs,
            Sense::Eq,
            1.0,
        );
    }

    // Running machines follow the system shift level.
    for s in 1..STATE_COUNT {
        for (k, machine) in inst.machines.iter().enumerate() {
            for t in 0..periods {
                let mut coeffs: Vec<(usize, f64)> = Transition::all()
                    .filter(|e| e.is_running() && e.head() as usize == s)
                    .map(|e| (idx.x(k, t, e), 1.0))
                    .collect();
                coeffs.push((idx.z(s, t), -1.0));
                b.add_row(
                    RowFamily::ShiftLink,
                    format!("shift_link(s{s},{},t{})", machine.id, t + 1),
                    coeffs,
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    // Opening and closing events track shift-level changes; period 1
    // compares against the known period-0 level.
    let initial_level = |s: usize| -> f64 {
        if s as u8 == inst.horizon.initial_shifts {
            1.0
        } else {
            0.0
        }
    };
    for s in 0..STATE_COUNT {
        for t in 0..periods {
            let mut coeffs = vec![(idx.z(s, t), 1.0), (idx.opened(s, t), -1.0)];
            let rhs = if t == 0 {
                initial_level(s)
            } else {
                coeffs.push((idx.z(s, t - 1), -1.0));
                0.0
            };
            b.add_row(
                RowFamily::ShiftOpenLink,
                format!("shift_open_link(s{s},t{})", t + 1),
                coeffs,
                Sense::Le,
                rhs,
            );
            let mut coeffs = vec![(idx.z(s, t), -1.0), (idx.closed(s, t), -1.0)];
            let rhs = if t == 0 {
                -initial_level(s)
            } else {
                coeffs.push((idx.z(s, t - 1), 1.0));
                0.0
            };
            b.add_row(
                RowFamily::ShiftCloseLink,
                format!("shift_close_link(s{s},t{})", t + 1),
                coeffs,
                Sense::Le,
                rhs,
            );
        }
    }

    // --- Demand ---

    // Inventory balance as >=: production plus carried stock covers demand,
    // overproduction is allowed but priced by production and holding costs.
    for (i, item) in inst.items.iter().enumerate() {
        for t in 0..periods {
            let mut coeffs = Vec::new();
            for k in 0..n_machines {
                if let Some(j) = idx.y(i, k, t) {
                    coeffs.push((j, 1.0));
                }
            }
            coeffs.push((idx.inv(i, t), -1.0));
            let mut rhs = item.demand[t] / QUANTITY_SCALE;
            if t == 0 {
                rhs -= item.initial_inventory / QUANTITY_SCALE;
            } else {
                coeffs.push((idx.inv(i, t - 1), 1.0));
            }
            b.add_row(
                RowFamily::DemandBalance,
                format!("demand_balance({},t{})", item.id, t + 1),
                coeffs,
                Sense::Ge,
                rhs,
            );
        }
    }

    // --- Maintenance ---

    if maintenance_on {
        for (k, machine) in inst.machines.iter().enumerate() {
            let ftm = machine.maintenance_interval;
            for t in 0..periods {
                // Clock accumulates previous-period hours and resets (by up
                // to FTM) when a maintenance is executed.
                let mut coeffs = vec![(idx.tm(k, t).unwrap(), 1.0)];
                if t > 0 {
                    coeffs.push((idx.tm(k, t - 1).unwrap(), -1.0));
                    for i in 0..n_items {
                        if let Some(j) = idx.y(i, k, t - 1) {
                            coeffs.push((j, -hours[i][k]));
                        }
                    }
                }
                for w in 0..slots[k] {
                    coeffs.push((idx.m(k, w, t).unwrap(), ftm));
                }
                b.add_row(
                    RowFamily::MaintenanceClock,
                    format!("maintenance_clock({},t{})", machine.id, t + 1),
                    coeffs,
                    Sense::Ge,
                    0.0,
                );
                b.add_row(
                    RowFamily::MaintenanceClockCap,
                    format!("maintenance_clock_cap({},t{})", machine.id, t + 1),
                    vec![(idx.tm(k, t).unwrap(), 1.0)],
                    Sense::Le,
                    ftm,
                );
            }

            // Slot w+1 cannot run before slot w has run.
            for w in 0..slots[k].saturating_sub(1) {
                for t in 0..periods {
                    let mut coeffs: Vec<(usize, f64)> =
                        (0..=t).map(|tau| (idx.m(k, w, tau).unwrap(), 1.0)).collect();
                    coeffs.push((idx.m(k, w + 1, t).unwrap(), -1.0));
                    b.add_row(
                        RowFamily::MaintenanceOrder,
                        format!("maintenance_order(w{},{},t{})", w + 2, machine.id, t + 1),
                        coeffs,
                        Sense::Ge,
                        0.0,
                    );
                }
            }

            // Each slot runs at most once.
            for w in 0..slots[k] {
                let coeffs = (0..periods)
                    .map(|t| (idx.m(k, w, t).unwrap(), 1.0))
                    .collect();
                b.add_row(
                    RowFamily::MaintenanceOnce,
                    format!("maintenance_once(w{},{})", w + 1, machine.id),
                    coeffs,
                    Sense::Le,
                    1.0,
                );
            }

            // Only machines that have entered operation can be maintained.
            for w in 0..slots[k] {
                for t in 0..periods {
                    let mut coeffs = vec![(idx.m(k, w, t).unwrap(), 1.0)];
                    for tau in 0..=t {
                        for e in Transition::all() {
                            if e.is_running() {
                                coeffs.push((idx.x(k, tau, e), -1.0));
                            }
                        }
                    }
                    b.add_row(
                        RowFamily::MaintenanceNeedsOperation,
                        format!(
                            "maintenance_requires_operation(w{},{},t{})",
                            w + 1,
                            machine.id,
                            t + 1
                        ),
                        coeffs,
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }

    // --- Capacity and useful life ---

    for (k, machine) in inst.machines.iter().enumerate() {
        for t in 0..periods {
            // Production plus maintenance time within available shift hours.
            let mut coeffs = Vec::new();
            for i in 0..n_items {
                if let Some(j) = idx.y(i, k, t) {
                    coeffs.push((j, hours[i][k]));
                }
            }
            for w in 0..slots[k] {
                coeffs.push((idx.m(k, w, t).unwrap(), machine.maintenance_durations[w]));
            }
            for e in Transition::all() {
                if e.is_running() {
                    coeffs.push((
                        idx.x(k, t, e),
                        -machine.max_utilization * shift_length * e.head() as f64,
                    ));
                }
            }
            b.add_row(
                RowFamily::Capacity,
                format!("capacity({},t{})", machine.id, t + 1),
                coeffs,
                Sense::Le,
                0.0,
            );

            // Production hours cannot exceed the remaining useful life.
            let mut coeffs = Vec::new();
            for i in 0..n_items {
                if let Some(j) = idx.y(i, k, t) {
                    coeffs.push((j, hours[i][k]));
                }
            }
            coeffs.push((idx.rl(k, t), -1.0));
            b.add_row(
                RowFamily::LifeUsageCap,
                format!("life_usage_cap({},t{})", machine.id, t + 1),
                coeffs,
                Sense::Le,
                0.0,
            );

            // Remaining life: replenished by purchase, consumed by use.
            let mut coeffs = vec![(idx.rl(k, t), 1.0)];
            for e in Transition::all() {
                if e.classify() == TransitionClass::Purchase {
                    coeffs.push((idx.x(k, t, e), -machine.useful_life));
                }
            }
            let rhs = if t == 0 {
                machine.remaining_life_start
            } else {
                coeffs.push((idx.rl(k, t - 1), -1.0));
                for i in 0..n_items {
                    if let Some(j) = idx.y(i, k, t - 1) {
                        coeffs.push((j, hours[i][k]));
                    }
                }
                0.0
            };
            b.add_row(
                RowFamily::LifeBalance,
                format!("life_balance({},t{})", machine.id, t + 1),
                coeffs,
                Sense::Eq,
                rhs,
            );

            // Salvaged life only on discard, and never more than remains.
            let mut coeffs = vec![(idx.rf(k, t), 1.0)];
            for e in Transition::all() {
                if e.classify() == TransitionClass::Discard {
                    coeffs.push((idx.x(k, t, e), -machine.useful_life));
                }
            }
            b.add_row(
                RowFamily::SalvageDiscardCap,
                format!("salvage_discard_cap({},t{})", machine.id, t + 1),
                coeffs,
                Sense::Le,
                0.0,
            );
            b.add_row(
                RowFamily::SalvageLifeCap,
                format!("salvage_life_cap({},t{})", machine.id, t + 1),
                vec![(idx.rf(k, t), 1.0), (idx.rl(k, t), -1.0)],
                Sense::Le,
                0.0,
            );
        }
    }

    // --- Objective ---

    let tables = &inst.tables;
    let mut objective = vec![0.0; b.variables.len()];
    for (k, machine) in inst.machines.iter().enumerate() {
        let workers = machine.workers_required;
        for t in 0..periods {
            for e in Transition::all() {
                let mut cost = 0.0;
                if e.classify() == TransitionClass::Purchase {
                    cost += tables.investment[k][t];
                }
                cost += e.head() as f64 * tables.labor[k][t] * workers;
                cost += e.shifts_opened() as f64 * tables.hiring[k][t] * workers;
                cost += e.shifts_closed() as f64 * tables.firing[k][t] * workers;
                objective[idx.x(k, t, e)] = cost;
            }
            for w in 0..slots[k] {
                objective[idx.m(k, w, t).unwrap()] = tables.maintenance[k][w][t];
            }
            objective[idx.rf(k, t)] = -tables.salvage_rate[k][t];
        }
    }
    for s in 0..STATE_COUNT {
        for t in 0..periods {
            objective[idx.opened(s, t)] = tables.shift_opening[s][t];
            objective[idx.closed(s, t)] = tables.shift_closing[s][t];
        }
    }
    let taxed = variant == Variant::Spt;
    for (i, item) in inst.items.iter().enumerate() {
        for t in 0..periods {
            let mut holding = tables.holding[i][t];
            if taxed {
                holding += tables.carbon_tax[t] * item.holding_emission;
            }
            objective[idx.inv(i, t)] = QUANTITY_SCALE * holding;
            for k in 0..n_machines {
                if let Some(j) = idx.y(i, k, t) {
                    let mut unit = tables.production[i][k][t];
                    if taxed {
                        unit += tables.carbon_tax[t] * item.production_emission[k];
                    }
                    objective[j] = QUANTITY_SCALE * unit;
                }
            }
        }
    }

    MilpModel {
        variant,
        variables: b.variables,
        rows: b.rows,
        objective,
        idx,
        instance: inst,
    }
}
