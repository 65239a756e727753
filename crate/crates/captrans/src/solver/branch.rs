//! Branch-and-bound over the binary variables of a model.
//!
//! Depth-first diving finds a first incumbent quickly; the search then
//! switches to best-first on the node bounds. The LP workspace persists
//! across nodes: only variable bounds change, and phase 1 of the simplex
//! repairs whatever the previous basis left out of range. Everything is
//! sequential and tie-broken by index, so a given (model, config) pair
//! always explores the identical tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::presolve::tighten_bounds;
use super::simplex::{LpStatus, Simplex};
use super::{BranchRule, LinearProgram, MilpResult, MilpStatus, SolverConfig, Tolerances};
use crate::error::{Error, Result};
use crate::model::{MilpModel, INTEGRALITY_TOL};

struct Node {
    id: u64,
    depth: u32,
    /// Parent LP objective: a valid lower bound for the subtree.
    bound: f64,
    /// Bound fixes along the path from the root: (var, lower, upper).
    fixes: Vec<(u32, f64, f64)>,
    /// Which variable the last fix branched on, and the LP fraction it had.
    branched: Option<(u32, bool, f64)>,
}

struct HeapEntry(Node);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.bound == other.0.bound && self.0.id == other.0.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the smallest bound pops first,
        // oldest node on ties.
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Per-variable average objective degradation for pseudo-cost branching.
struct PseudoCosts {
    up_sum: Vec<f64>,
    up_count: Vec<u32>,
    down_sum: Vec<f64>,
    down_count: Vec<u32>,
}

impl PseudoCosts {
    fn new(n: usize) -> Self {
        PseudoCosts {
            up_sum: vec![0.0; n],
            up_count: vec![0; n],
            down_sum: vec![0.0; n],
            down_count: vec![0; n],
        }
    }

    fn record(&mut self, var: usize, up: bool, fraction: f64, degradation: f64) {
        let per_unit = degradation / fraction.max(1e-6);
        if up {
            self.up_sum[var] += per_unit;
            self.up_count[var] += 1;
        } else {
            self.down_sum[var] += per_unit;
            self.down_count[var] += 1;
        }
    }

    fn score(&self, var: usize, frac: f64) -> Option<f64> {
        if self.up_count[var] == 0 || self.down_count[var] == 0 {
            return None;
        }
        let up = self.up_sum[var] / self.up_count[var] as f64 * (1.0 - frac);
        let down = self.down_sum[var] / self.down_count[var] as f64 * frac;
        Some(up.max(1e-9) * down.max(1e-9))
    }
}

/// Fractional part relative to the nearest integer, in [0, 0.5].
fn fractionality(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn select_branching_variable(
    values: &[f64],
    integer: &[bool],
    rule: BranchRule,
    pseudo: &PseudoCosts,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut best_unscored: Option<(usize, f64)> = None;
    for (j, &x) in values.iter().enumerate() {
        if !integer[j] {
            continue;
        }
        let frac = fractionality(x);
        if frac <= INTEGRALITY_TOL {
            continue;
        }
        match rule {
            BranchRule::MostFractional => {
                if best.map_or(true, |(_, f)| frac > f) {
                    best = Some((j, frac));
                }
            }
            BranchRule::PseudoCost => match pseudo.score(j, x - x.floor()) {
                Some(score) => {
                    if best.map_or(true, |(_, s)| score > s) {
                        best = Some((j, score));
                    }
                }
                None => {
                    if best_unscored.map_or(true, |(_, f)| frac > f) {
                        best_unscored = Some((j, frac));
                    }
                }
            },
        }
    }
    // Unscored fractional variables take priority so every variable earns
    // history before scores decide.
    if rule == BranchRule::PseudoCost {
        if let Some((j, _)) = best_unscored {
            return Some(j);
        }
    }
    best.map(|(j, _)| j)
}

/// Solves the model to the configured gap with branch-and-bound.
pub fn solve_milp(model: &MilpModel, config: &SolverConfig) -> Result<MilpResult> {
    config.validate()?;
    let start = Instant::now();
    let lp = LinearProgram::from_model(model);
    let n = lp.num_structural;

    let mut root_lower = lp.lower.clone();
    let mut root_upper = lp.upper.clone();
    let tightened = tighten_bounds(
        &model.rows,
        &mut root_lower,
        &mut root_upper,
        &lp.integer,
        30,
    );
    if tightened.is_err() {
        return Ok(MilpResult {
            status: MilpStatus::Infeasible,
            plan: None,
            objective: None,
            best_bound: f64::INFINITY,
            gap: None,
            nodes: 0,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }

    let mut simplex = Simplex::new(&lp, Tolerances::default());
    let mut work_lower = root_lower.clone();
    let mut work_upper = root_upper.clone();
    simplex.set_structural_bounds(&work_lower, &work_upper);
    let root = simplex.solve_cold();

    match root.status {
        LpStatus::Infeasible => {
            return Ok(MilpResult {
                status: MilpStatus::Infeasible,
                plan: None,
                objective: None,
                best_bound: f64::INFINITY,
                gap: None,
                nodes: 1,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        LpStatus::Unbounded => {
            return Ok(MilpResult {
                status: MilpStatus::Unbounded,
                plan: None,
                objective: None,
                best_bound: f64::NEG_INFINITY,
                gap: None,
                nodes: 1,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        LpStatus::NumericalFailure => {
            return Err(Error::Solver(
                "root relaxation failed numerically after bounded retries".into(),
            ));
        }
        LpStatus::Optimal => {}
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut pseudo = PseudoCosts::new(n);
    let mut next_id: u64 = 1;
    let mut nodes_processed: u64 = 1;
    let mut dive_stack: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut status = MilpStatus::Optimal;

    let prune_eps = |obj: f64| 1e-9 * obj.abs().max(1.0);

    // Either record the root as incumbent or seed the tree with its children.
    match select_branching_variable(&root.values, &lp.integer, config.branching, &pseudo) {
        None => {
            incumbent = Some((root.objective, root.values.clone()));
        }
        Some(var) => {
            push_children(
                &mut dive_stack,
                &mut next_id,
                &Node {
                    id: 0,
                    depth: 0,
                    bound: root.objective,
                    fixes: Vec::new(),
                    branched: None,
                },
                var,
                root.values[var],
                root.objective,
            );
        }
    }

    let global_bound = |heap: &BinaryHeap<HeapEntry>, stack: &[Node], inc: Option<f64>| -> f64 {
        let mut bound = inc.unwrap_or(f64::INFINITY);
        if let Some(top) = heap.peek() {
            bound = bound.min(top.0.bound);
        }
        for node in stack {
            bound = bound.min(node.bound);
        }
        bound
    };

    loop {
        // Node selection: depth-first until the first incumbent, then
        // best-first with plunging. A plunge keeps following the preferred
        // child of the node just solved (the dive stack), which keeps the
        // warm basis relevant; the sibling waits in the heap, and once the
        // chain dies the best-bound node is drawn next.
        let node = if let Some(node) = dive_stack.pop() {
            Some(node)
        } else {
            heap.pop().map(|e| e.0)
        };
        let Some(node) = node else {
            break;
        };

        // Stop checks.
        if start.elapsed().as_secs_f64() > config.time_limit {
            status = MilpStatus::TimeLimit;
            break;
        }
        if let Some(limit) = config.node_limit {
            if nodes_processed >= limit {
                status = MilpStatus::NodeLimit;
                break;
            }
        }
        if let Some((inc_obj, _)) = incumbent {
            let bound = node
                .bound
                .min(global_bound(&heap, &dive_stack, Some(inc_obj)));
            let gap = (inc_obj - bound) / inc_obj.abs().max(1e-10);
            if gap <= config.gap {
                status = MilpStatus::GapLimit;
                // The popped node stays unexplored; its bound is covered by
                // the gap we just proved.
                heap.push(HeapEntry(node));
                break;
            }
            if node.bound >= inc_obj - prune_eps(inc_obj) {
                continue;
            }
        }

        // Materialize this node's bounds, propagate them, and solve.
        // Propagation is plain bound tightening: branching decisions chase
        // through the transition-continuity equalities and fix whole chains
        // before the LP sees them.
        work_lower.copy_from_slice(&root_lower);
        work_upper.copy_from_slice(&root_upper);
        for &(j, lo, hi) in &node.fixes {
            work_lower[j as usize] = lo;
            work_upper[j as usize] = hi;
        }
        if tighten_bounds(&model.rows, &mut work_lower, &mut work_upper, &lp.integer, 5)
            .is_err()
        {
            nodes_processed += 1;
            continue;
        }
        simplex.set_structural_bounds(&work_lower, &work_upper);
        let result = simplex.solve_from_current();
        nodes_processed += 1;

        match result.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(Error::Solver(
                    "LP relaxation unbounded below a bounded root".into(),
                ));
            }
            LpStatus::NumericalFailure => {
                return Err(Error::Solver(
                    "node relaxation failed numerically after bounded retries".into(),
                ));
            }
            LpStatus::Optimal => {}
        }

        if let Some((var, up, frac)) = node.branched {
            let degradation = (result.objective - node.bound).max(0.0);
            pseudo.record(var as usize, up, frac, degradation);
        }

        if let Some((inc_obj, _)) = incumbent {
            if result.objective >= inc_obj - prune_eps(inc_obj) {
                continue;
            }
        }

        match select_branching_variable(&result.values, &lp.integer, config.branching, &pseudo) {
            None => {
                // Integral: new incumbent (strictly better, by the check
                // above).
                incumbent = Some((result.objective, result.values.clone()));
            }
            Some(var) => {
                // The preferred child stays on the dive stack; under
                // plunging its sibling goes straight to the heap.
                push_children(
                    &mut dive_stack,
                    &mut next_id,
                    &node,
                    var,
                    result.values[var],
                    result.objective,
                );
                if incumbent.is_some() {
                    let preferred = dive_stack.pop().expect("two children pushed");
                    let sibling = dive_stack.pop().expect("two children pushed");
                    heap.push(HeapEntry(sibling));
                    dive_stack.push(preferred);
                }
            }
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    let open_bound = global_bound(&heap, &dive_stack, incumbent.as_ref().map(|i| i.0));

    match incumbent {
        None => Ok(MilpResult {
            status: match status {
                MilpStatus::TimeLimit => MilpStatus::TimeLimit,
                MilpStatus::NodeLimit => MilpStatus::NodeLimit,
                _ => MilpStatus::Infeasible,
            },
            plan: None,
            objective: None,
            best_bound: open_bound,
            gap: None,
            nodes: nodes_processed,
            wall_time,
        }),
        Some((objective, values)) => {
            let exhausted = heap.is_empty() && dive_stack.is_empty();
            let best_bound = if exhausted && status == MilpStatus::Optimal {
                objective
            } else {
                open_bound
            };
            let gap = ((objective - best_bound) / objective.abs().max(1e-10)).max(0.0);
            let final_status = if status == MilpStatus::Optimal && !exhausted {
                // Loop ended through the gap check.
                MilpStatus::GapLimit
            } else {
                status
            };
            let plan = model
                .decode(&values)
                .map_err(|e| Error::Solver(format!("incumbent failed verification: {e}")))?;
            Ok(MilpResult {
                status: final_status,
                plan: Some(plan),
                objective: Some(objective),
                best_bound,
                gap: Some(gap),
                nodes: nodes_processed,
                wall_time,
            })
        }
    }
}

/// Pushes the two children of `node` branching on `var`; the child nearer
/// the LP value is pushed last so a dive explores it first.
fn push_children(
    stack: &mut Vec<Node>,
    next_id: &mut u64,
    node: &Node,
    var: usize,
    value: f64,
    bound: f64,
) {
    let frac = value - value.floor();
    // All integer variables here are binary: branching fixes the variable.
    let make = |id: u64, up: bool| -> Node {
        let mut fixes = node.fixes.clone();
        let fixed = if up { value.ceil() } else { value.floor() };
        fixes.push((var as u32, fixed, fixed));
        Node {
            id,
            depth: node.depth + 1,
            bound,
            fixes,
            branched: Some((var as u32, up, frac)),
        }
    };
    let down = make(*next_id, false);
    let up = make(*next_id + 1, true);
    *next_id += 2;
    if frac >= 0.5 {
        stack.push(down);
        stack.push(up);
    } else {
        stack.push(up);
        stack.push(down);
    }
}
