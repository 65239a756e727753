//! Bounded-variable primal simplex.
//!
//! Rows are lifted to equalities with one logical variable each whose bounds
//! encode the sense. The basis inverse is kept as a dense column-major
//! matrix, updated in product form on every pivot and refactorized at a
//! fixed cadence. Feasibility is restored with a composite phase-1
//! objective (sum of basic bound violations), which doubles as the repair
//! step when a warm-started basis is out of bounds after branching.
//!
//! The solver is a reusable workspace: branch-and-bound mutates the
//! structural bounds between solves and continues from whatever basis is
//! current, so diving down a branch costs only a handful of pivots.

use super::lu::{ColumnData, LuBasis};
use super::{LinearProgram, Tolerances};
use crate::model::Sense;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Could not reach a verified solution within the retry budget.
    NumericalFailure,
}

/// Basis snapshot sufficient to warm-start a later solve.
#[derive(Debug, Clone)]
pub struct Basis {
    /// Variable index occupying each row position.
    pub basic: Vec<u32>,
    /// For nonbasic variables: parked at the upper bound?
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Structural variable values (logicals stripped).
    pub values: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
    /// Residual primal infeasibility from phase 1 (zero when feasible).
    pub infeasibility: f64,
    /// Row multipliers certifying infeasibility, when detected.
    pub certificate: Option<Vec<f64>>,
}

const REFACTOR_INTERVAL: usize = 100;
/// Consecutive non-improving pivots before switching to Bland's rule.
const STALL_LIMIT: usize = 400;
const MAX_ITERATIONS: usize = 500_000;

pub static REFACTOR_COUNT: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static RESTART_COUNT: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static SOLVE_COUNT: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static PHASE1_ITERS: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static PHASE2_ITERS: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static PIVOT_COUNT: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
pub static REFACTOR_NANOS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

pub struct Simplex<'a> {
    lp: &'a LinearProgram,
    tol: Tolerances,
    n: usize,
    m: usize,
    total: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    basic: Vec<u32>,
    /// Row position of a basic variable, or -1 when nonbasic.
    position: Vec<i32>,
    at_upper: Vec<bool>,
    /// Factorized basis plus the eta file accumulated since.
    lu: Option<LuBasis>,
    xb: Vec<f64>,
    rhs_scratch: Vec<f64>,
    initialized: bool,
    iterations: usize,
    stalled: usize,
    bland: bool,
    ftran: Vec<f64>,
    btran: Vec<f64>,
    weights: Vec<f64>,
    /// Devex reference weights per variable.
    devex: Vec<f64>,
    unit_scratch: Vec<f64>,
    pivot_row_scratch: Vec<f64>,
}

impl<'a> Simplex<'a> {
    pub fn new(lp: &'a LinearProgram, tol: Tolerances) -> Self {
        let n = lp.num_structural;
        let m = lp.num_rows;
        let total = n + m;
        let mut lower = Vec::with_capacity(total);
        let mut upper = Vec::with_capacity(total);
        lower.extend_from_slice(&lp.lower);
        upper.extend_from_slice(&lp.upper);
        for sense in &lp.row_sense {
            match sense {
                Sense::Le => {
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                }
                Sense::Ge => {
                    lower.push(f64::NEG_INFINITY);
                    upper.push(0.0);
                }
                Sense::Eq => {
                    lower.push(0.0);
                    upper.push(0.0);
                }
            }
        }
        let mut objective = Vec::with_capacity(total);
        objective.extend_from_slice(&lp.objective);
        objective.resize(total, 0.0);

        Simplex {
            lp,
            tol,
            n,
            m,
            total,
            lower,
            upper,
            objective,
            basic: Vec::new(),
            position: vec![-1; total],
            at_upper: vec![false; total],
            lu: None,
            xb: vec![0.0; m],
            rhs_scratch: vec![0.0; m],
            initialized: false,
            iterations: 0,
            stalled: 0,
            bland: false,
            ftran: vec![0.0; m],
            btran: vec![0.0; m],
            weights: vec![0.0; m],
            devex: vec![1.0; total],
            unit_scratch: vec![0.0; m],
            pivot_row_scratch: vec![0.0; m],
        }
    }

    /// Replaces the structural bounds (logical bounds are fixed by senses).
    pub fn set_structural_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        self.lower[..self.n].copy_from_slice(lower);
        self.upper[..self.n].copy_from_slice(upper);
    }

    /// Solves from the all-logical basis.
    pub fn solve_cold(&mut self) -> LpResult {
        self.reset_to_logical_basis();
        self.run()
    }

    /// Solves from a stored basis (refactorizes once).
    pub fn solve_with_basis(&mut self, basis: &Basis) -> LpResult {
        if basis.basic.len() == self.m && basis.at_upper.len() == self.total {
            self.position.iter_mut().for_each(|p| *p = -1);
            self.basic = basis.basic.clone();
            self.at_upper = basis.at_upper.clone();
            for (row, &j) in self.basic.iter().enumerate() {
                self.position[j as usize] = row as i32;
            }
            self.initialized = true;
            if self.refactor().is_err() {
                self.reset_to_logical_basis();
            }
        } else {
            self.reset_to_logical_basis();
        }
        self.run()
    }

    /// Solves from whatever basis the workspace currently holds. Intended
    /// for branch-and-bound dives where only bounds changed since the last
    /// solve.
    pub fn solve_from_current(&mut self) -> LpResult {
        if !self.initialized {
            self.reset_to_logical_basis();
        }
        self.run()
    }

    fn run(&mut self) -> LpResult {
        self.iterations = 0;
        self.stalled = 0;
        self.bland = false;

        // A failed refactorization or accumulated drift discovered after a
        // refresh sends the solve back to phase 1; a bounded number of such
        // retries guards against numerical livelock.
        SOLVE_COUNT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        // Accept a solution when no basic strays more than `accept` beyond
        // its bounds; that keeps decoded vectors inside the model's own
        // tolerance with room to spare.
        let accept = self.tol.feasibility * 5.0;
        for _attempt in 0..24 {
            if _attempt > 0 {
                RESTART_COUNT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
            // Infeasibility is only trusted when declared on a freshly
            // factorized basis, free of eta-file drift.
            let fresh = self.lu.as_ref().map_or(false, |lu| lu.eta_count() == 0);
            self.compute_basic_values();

            // Phase 1: drive the bound violations to zero.
            match self.phase(true) {
                PhaseOutcome::Restart => continue,
                PhaseOutcome::Unbounded => unreachable!("phase 1 is bounded below"),
                PhaseOutcome::Finished => {}
            }
            let worst = self.max_infeasibility();
            if worst > accept {
                if fresh {
                    // Multipliers from the final phase-1 pricing certify
                    // that no point satisfies all rows within bounds.
                    self.price_weights(true);
                    let certificate = self.btran_weights().to_vec();
                    return self.finish(
                        LpStatus::Infeasible,
                        self.total_infeasibility(),
                        Some(certificate),
                    );
                }
                if self.refactor().is_err() {
                    self.reset_to_logical_basis();
                }
                continue;
            }

            // Phase 2: optimize the true objective.
            match self.phase(false) {
                PhaseOutcome::Restart => continue,
                PhaseOutcome::Unbounded => return self.finish(LpStatus::Unbounded, 0.0, None),
                PhaseOutcome::Finished => {}
            }
            // Refresh at full accuracy and re-verify before reporting: if
            // drift hid a violation, repair and re-optimize.
            if self.refactor().is_err() {
                self.reset_to_logical_basis();
                continue;
            }
            self.compute_basic_values();
            if self.max_infeasibility() > accept {
                continue;
            }
            return self.finish(LpStatus::Optimal, 0.0, None);
        }
        let infeasibility = self.total_infeasibility();
        self.finish(LpStatus::NumericalFailure, infeasibility, None)
    }

    fn reset_to_logical_basis(&mut self) {
        self.position.iter_mut().for_each(|p| *p = -1);
        self.basic = (0..self.m).map(|i| (self.n + i) as u32).collect();
        for (row, &j) in self.basic.iter().enumerate() {
            self.position[j as usize] = row as i32;
        }
        for j in 0..self.total {
            self.at_upper[j] = !self.lower[j].is_finite() && self.upper[j].is_finite();
        }
        // The logical basis is the identity; factoring it is linear work.
        self.lu = LuBasis::factor(self.m, |p| ColumnData::Unit(p as u32)).ok();
        debug_assert!(self.lu.is_some());
        self.initialized = true;
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        let (l, u) = (self.lower[j], self.upper[j]);
        if self.at_upper[j] {
            if u.is_finite() {
                u
            } else {
                0.0
            }
        } else if l.is_finite() {
            l
        } else if u.is_finite() {
            u
        } else {
            0.0
        }
    }

    fn column(&self, j: usize) -> ColumnRef<'a> {
        if j < self.n {
            ColumnRef::Sparse(&self.lp.cols[j])
        } else {
            ColumnRef::Unit((j - self.n) as u32)
        }
    }

    fn compute_basic_values(&mut self) {
        let mut residual = self.lp.rhs.clone();
        for j in 0..self.total {
            if self.position[j] >= 0 {
                continue;
            }
            let x = self.nonbasic_value(j);
            if x == 0.0 {
                continue;
            }
            match self.column(j) {
                ColumnRef::Sparse(entries) => {
                    for &(i, a) in entries {
                        residual[i as usize] -= a * x;
                    }
                }
                ColumnRef::Unit(i) => residual[i as usize] -= x,
            }
        }
        match self.lu.as_mut() {
            Some(lu) => lu.ftran(&residual, &mut self.xb),
            None => self.xb.iter_mut().for_each(|v| *v = 0.0),
        }
    }

    /// Rebuilds the basis factorization from scratch, dropping the etas.
    fn refactor(&mut self) -> Result<(), ()> {
        let _t0 = std::time::Instant::now();
        REFACTOR_COUNT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let basic = &self.basic;
        let n = self.n;
        let cols = &self.lp.cols;
        let factored = LuBasis::factor(self.m, |p| {
            let j = basic[p] as usize;
            if j < n {
                ColumnData::Sparse(&cols[j])
            } else {
                ColumnData::Unit((j - n) as u32)
            }
        });
        REFACTOR_NANOS.fetch_add(
            _t0.elapsed().as_nanos() as u64,
            std::sync::atomic::Ordering::Relaxed,
        );
        match factored {
            Ok(lu) => {
                self.lu = Some(lu);
                Ok(())
            }
            Err(()) => Err(()),
        }
    }

    fn ftran_column(&mut self, j: usize) {
        self.rhs_scratch.iter_mut().for_each(|v| *v = 0.0);
        match self.column(j) {
            ColumnRef::Sparse(entries) => {
                for &(k, a) in entries {
                    self.rhs_scratch[k as usize] = a;
                }
            }
            ColumnRef::Unit(k) => {
                self.rhs_scratch[k as usize] = 1.0;
            }
        }
        self.lu
            .as_mut()
            .expect("basis factorized")
            .ftran(&self.rhs_scratch, &mut self.ftran);
    }

    /// Fills `self.weights` with the pricing weights over basic positions.
    fn price_weights(&mut self, phase_one: bool) {
        for i in 0..self.m {
            self.weights[i] = if phase_one {
                let (l, u) = self.basic_bounds(i);
                let x = self.xb[i];
                if x < l - self.tol.feasibility {
                    -1.0
                } else if x > u + self.tol.feasibility {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.objective[self.basic[i] as usize]
            };
        }
    }

    fn btran_weights(&mut self) -> &[f64] {
        self.lu
            .as_mut()
            .expect("basis factorized")
            .btran(&self.weights, &mut self.btran);
        &self.btran
    }

    fn basic_bounds(&self, row: usize) -> (f64, f64) {
        let j = self.basic[row] as usize;
        (self.lower[j], self.upper[j])
    }

    fn total_infeasibility(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let (l, u) = self.basic_bounds(i);
                (l - self.xb[i]).max(self.xb[i] - u).max(0.0)
            })
            .sum()
    }

    fn max_infeasibility(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let (l, u) = self.basic_bounds(i);
                (l - self.xb[i]).max(self.xb[i] - u).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn reduced_cost(&self, j: usize, phase_one: bool) -> f64 {
        let base = if phase_one { 0.0 } else { self.objective[j] };
        let dot = match self.column(j) {
            ColumnRef::Sparse(entries) => entries
                .iter()
                .map(|&(i, a)| self.btran[i as usize] * a)
                .sum::<f64>(),
            ColumnRef::Unit(i) => self.btran[i as usize],
        };
        base - dot
    }

    /// Runs one phase to completion.
    fn phase(&mut self, phase_one: bool) -> PhaseOutcome {
        let _iter_counter = if phase_one { &PHASE1_ITERS } else { &PHASE2_ITERS };
        let mut last_value = f64::INFINITY;
        self.devex.iter_mut().for_each(|w| *w = 1.0);
        loop {
            self.iterations += 1;
            _iter_counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            if self.iterations > MAX_ITERATIONS {
                // Iteration runaway is a numerical pathology, not an answer.
                if self.refactor().is_err() {
                    self.reset_to_logical_basis();
                }
                return PhaseOutcome::Restart;
            }
            let etas = self.lu.as_ref().map_or(0, LuBasis::eta_count);
            if etas >= REFACTOR_INTERVAL {
                if self.refactor().is_err() {
                    self.reset_to_logical_basis();
                    return PhaseOutcome::Restart;
                }
                self.compute_basic_values();
                // Gross corruption goes back to phase 1 immediately; small
                // drift keeps optimizing and is repaired after phase 2.
                if !phase_one && self.max_infeasibility() > 1e-4 {
                    return PhaseOutcome::Restart;
                }
            }
            if phase_one && self.max_infeasibility() <= self.tol.feasibility {
                return PhaseOutcome::Finished;
            }

            self.price_weights(phase_one);
            self.btran_weights();

            // Entering variable: Devex pricing (reduced cost squared over
            // reference weight), Bland fallback on stall.
            let mut entering: Option<(usize, f64, f64)> = None; // (var, score, dir)
            for j in 0..self.total {
                if self.position[j] >= 0 || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, phase_one);
                let free = !self.lower[j].is_finite() && !self.upper[j].is_finite();
                let (eligible, dir) = if free {
                    (d.abs() > self.tol.optimality, if d < 0.0 { 1.0 } else { -1.0 })
                } else if self.at_upper[j] {
                    (d > self.tol.optimality, -1.0)
                } else {
                    (d < -self.tol.optimality, 1.0)
                };
                if !eligible {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d.abs(), dir));
                    break;
                }
                let score = d * d / self.devex[j];
                if entering.as_ref().map_or(true, |&(_, best, _)| score > best) {
                    entering = Some((j, score, dir));
                }
            }
            let Some((q, _, dir)) = entering else {
                return PhaseOutcome::Finished;
            };

            self.ftran_column(q);

            // Two-pass ratio test. The entering variable moves by
            // theta >= 0 in direction `dir`; basic variable i moves at rate
            // `-dir * v_i`. A basic blocks at the bound it approaches from
            // inside, or (phase 1) when it first comes back into range from
            // outside. The first pass finds the smallest step with bounds
            // relaxed by the feasibility tolerance; the second picks the
            // largest pivot among rows whose exact step fits under it, which
            // keeps the basis update well conditioned at the price of bound
            // violations within tolerance.
            let span = self.upper[q] - self.lower[q];
            let flip_step = if span.is_finite() { span } else { f64::INFINITY };

            let blocking_step = |this: &Self, i: usize| -> Option<(f64, bool, f64)> {
                let v = this.ftran[i];
                if v.abs() < this.tol.pivot {
                    return None;
                }
                let rate = -dir * v;
                let (l, u) = this.basic_bounds(i);
                let x = this.xb[i];
                // A basic already beyond a bound and moving further away
                // must not block: its growing violation is what the phase-1
                // objective is pricing.
                let (limit, hits_upper) = if rate > 0.0 {
                    if x < l - this.tol.feasibility {
                        (l, false)
                    } else if x > u + this.tol.feasibility {
                        return None;
                    } else if u.is_finite() {
                        (u, true)
                    } else {
                        return None;
                    }
                } else if x > u + this.tol.feasibility {
                    (u, true)
                } else if x < l - this.tol.feasibility {
                    return None;
                } else if l.is_finite() {
                    (l, false)
                } else {
                    return None;
                };
                let exact = ((limit - x) / rate).max(0.0);
                let relaxed = exact + 0.05 * this.tol.feasibility / rate.abs();
                Some((exact, hits_upper, relaxed))
            };

            let leaving: Option<(usize, bool)> = if self.bland {
                // Exact ratio test with lowest-variable-index tie breaking:
                // the finiteness guarantee of the fallback rule needs exact
                // minimum steps, not the relaxed Harris window.
                let mut min_step = flip_step;
                for i in 0..self.m {
                    if let Some((exact, _, _)) = blocking_step(self, i) {
                        min_step = min_step.min(exact);
                    }
                }
                let mut best: Option<(usize, bool, usize)> = None; // (row, hits, var)
                for i in 0..self.m {
                    if let Some((exact, hits_upper, _)) = blocking_step(self, i) {
                        if exact <= min_step + 1e-12 {
                            let var = self.basic[i] as usize;
                            if best.map_or(true, |(_, _, v)| var < v) {
                                best = Some((i, hits_upper, var));
                            }
                        }
                    }
                }
                // The entering variable's own bound flip competes as a
                // candidate carrying its own index.
                if flip_step <= min_step + 1e-12 {
                    if best.map_or(true, |(_, _, v)| q < v) {
                        best = None;
                    }
                }
                best.map(|(row, hits, _)| (row, hits))
            } else {
                // Two-pass Harris: smallest relaxed step bounds the window,
                // the largest pivot inside it wins.
                let mut theta_relaxed = flip_step;
                for i in 0..self.m {
                    if let Some((_, _, relaxed)) = blocking_step(self, i) {
                        theta_relaxed = theta_relaxed.min(relaxed);
                    }
                }
                let mut best: Option<(usize, bool, f64)> = None;
                for i in 0..self.m {
                    if let Some((exact, hits_upper, _)) = blocking_step(self, i) {
                        if exact > theta_relaxed {
                            continue;
                        }
                        let score = self.ftran[i].abs();
                        if best.as_ref().map_or(true, |&(_, _, b)| score > b) {
                            best = Some((i, hits_upper, score));
                        }
                    }
                }
                best.map(|(row, hits, _)| (row, hits))
            };

            let any_block_possible = leaving.is_some() || flip_step.is_finite();
            match leaving {
                None if !any_block_possible => {
                    // Nothing blocks and the entering span is infinite. In
                    // phase 1 this cannot happen (the objective is bounded
                    // below and decreasing); in phase 2 it is unboundedness.
                    return PhaseOutcome::Unbounded;
                }
                None => {
                    // Bound flip: the entering variable crosses to its other
                    // bound without a basis change.
                    self.apply_step(q, dir, flip_step, None);
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((row, hits_upper)) => {
                    let (step, _, _) = blocking_step(self, row).expect("leaving row blocks");
                    if !self.bland {
                        self.update_devex_weights(q, row);
                    }
                    self.apply_step(q, dir, step, Some((row, hits_upper)));
                }
            }

            // Stall detection drives the Bland fallback.
            let value = if phase_one {
                self.total_infeasibility()
            } else {
                self.objective_value()
            };
            if value < last_value - 1e-12 {
                self.stalled = 0;
                self.bland = false;
            } else {
                self.stalled += 1;
                if self.stalled > STALL_LIMIT {
                    self.bland = true;
                }
            }
            last_value = value;
        }
    }

    /// Devex update on a basis change: the pivotal row scales every
    /// nonbasic reference weight, the leaving variable inherits from the
    /// entering one. Must run before the pivot is applied.
    fn update_devex_weights(&mut self, q: usize, row: usize) {
        let alpha_q = self.ftran[row];
        if alpha_q.abs() < 1e-12 {
            return;
        }
        let w_q = self.devex[q].max(1.0);
        let scale = w_q / (alpha_q * alpha_q);
        if scale > 1e9 {
            // Stale reference framework: start afresh.
            self.devex.iter_mut().for_each(|w| *w = 1.0);
            return;
        }
        // Pivotal row in row space via a unit btran.
        self.unit_scratch.iter_mut().for_each(|v| *v = 0.0);
        self.unit_scratch[row] = 1.0;
        self.lu
            .as_mut()
            .expect("basis factorized")
            .btran(&self.unit_scratch, &mut self.pivot_row_scratch);
        for j in 0..self.total {
            if self.position[j] >= 0 || j == q || self.lower[j] == self.upper[j] {
                continue;
            }
            let alpha_j = match self.column(j) {
                ColumnRef::Sparse(entries) => entries
                    .iter()
                    .map(|&(i, a)| self.pivot_row_scratch[i as usize] * a)
                    .sum::<f64>(),
                ColumnRef::Unit(i) => self.pivot_row_scratch[i as usize],
            };
            if alpha_j != 0.0 {
                let candidate = alpha_j * alpha_j * scale;
                if candidate > self.devex[j] {
                    self.devex[j] = candidate;
                }
            }
        }
        let leaving = self.basic[row] as usize;
        self.devex[leaving] = scale.max(1.0);
    }

    /// Moves the entering variable by `theta`, updates basic values, and
    /// pivots if a basic variable leaves.
    fn apply_step(&mut self, q: usize, dir: f64, theta: f64, pivot: Option<(usize, bool)>) {
        if theta > 0.0 {
            for i in 0..self.m {
                self.xb[i] -= dir * theta * self.ftran[i];
            }
        }
        let Some((row, hits_upper)) = pivot else {
            return;
        };
        let leaving_var = self.basic[row] as usize;
        let entering_value = self.nonbasic_value(q) + dir * theta;

        self.position[leaving_var] = -1;
        self.at_upper[leaving_var] = hits_upper;
        self.basic[row] = q as u32;
        self.position[q] = row as i32;

        // Product-form update: remember the entering column's image.
        debug_assert!(self.ftran[row].abs() > 1e-13);
        self.lu
            .as_mut()
            .expect("basis factorized")
            .push_eta(row, &self.ftran);
        self.xb[row] = entering_value;
        PIVOT_COUNT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    }

    fn objective_value(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.total {
            if self.position[j] < 0 {
                let x = self.nonbasic_value(j);
                if x != 0.0 {
                    total += self.objective[j] * x;
                }
            }
        }
        for i in 0..self.m {
            total += self.objective[self.basic[i] as usize] * self.xb[i];
        }
        total
    }

    fn finish(
        &mut self,
        status: LpStatus,
        infeasibility: f64,
        certificate: Option<Vec<f64>>,
    ) -> LpResult {
        // Refresh basic values at full accuracy before reporting.
        if self.lu.as_ref().map_or(0, LuBasis::eta_count) > 0 && self.refactor().is_ok() {
            self.compute_basic_values();
        }
        let mut values = vec![0.0; self.n];
        for (j, value) in values.iter_mut().enumerate() {
            *value = if self.position[j] >= 0 {
                self.xb[self.position[j] as usize]
            } else {
                self.nonbasic_value(j)
            };
        }
        let objective = values
            .iter()
            .zip(&self.lp.objective)
            .map(|(x, c)| x * c)
            .sum();
        LpResult {
            status,
            objective,
            values,
            basis: Basis {
                basic: self.basic.clone(),
                at_upper: self.at_upper.clone(),
            },
            iterations: self.iterations,
            infeasibility,
            certificate,
        }
    }
}

enum ColumnRef<'a> {
    Sparse(&'a [(u32, f64)]),
    Unit(u32),
}

enum PhaseOutcome {
    Finished,
    Unbounded,
    Restart,
}
