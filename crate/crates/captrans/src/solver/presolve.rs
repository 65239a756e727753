//! Activity-based bound tightening.
//!
//! The only presolve applied to a model: iterate over rows, derive implied
//! bounds for each variable from the minimal/maximal activity of the
//! others, and round integer bounds inward. Sound for the integer problem,
//! so the tightened bounds are valid for a whole branch-and-bound tree and
//! for exhaustive enumeration.

use crate::model::{Row, Sense};

const EPS: f64 = 1e-9;

/// Running activity sum that tracks infinite contributions separately.
#[derive(Clone, Copy, Default)]
struct Activity {
    finite: f64,
    infinities: u32,
}

impl Activity {
    fn add(&mut self, value: f64) {
        if value.is_finite() {
            self.finite += value;
        } else {
            self.infinities += 1;
        }
    }

    /// Total with `value` removed, if that leaves a finite sum.
    fn without(&self, value: f64) -> Option<f64> {
        if value.is_finite() {
            if self.infinities == 0 {
                Some(self.finite - value)
            } else {
                None
            }
        } else if self.infinities == 1 {
            Some(self.finite)
        } else {
            None
        }
    }

    fn total(&self) -> f64 {
        if self.infinities > 0 {
            f64::NEG_INFINITY
        } else {
            self.finite
        }
    }
}

/// Tightens `lower`/`upper` in place. Returns `Err(row name)` if some row
/// is proven unsatisfiable, `Ok(changed)` otherwise.
pub fn tighten_bounds(
    rows: &[Row],
    lower: &mut [f64],
    upper: &mut [f64],
    is_integer: &[bool],
    max_rounds: usize,
) -> Result<bool, String> {
    let mut any_change = false;
    for _ in 0..max_rounds {
        let mut changed = false;
        for row in rows {
            // min_activity uses each variable's cheapest contribution,
            // max_activity the dearest; infinities tracked separately.
            let mut min_act = Activity::default();
            let mut max_act = Activity::default();
            for &(j, a) in &row.coeffs {
                let (cmin, cmax) = contributions(a, lower[j], upper[j]);
                min_act.add(cmin);
                max_act.add(-cmax);
            }

            let check_le = matches!(row.sense, Sense::Le | Sense::Eq);
            let check_ge = matches!(row.sense, Sense::Ge | Sense::Eq);

            if check_le && min_act.total() > row.rhs + feas_eps(row.rhs) {
                return Err(row.name.clone());
            }
            if check_ge && -max_act.total() < row.rhs - feas_eps(row.rhs) {
                return Err(row.name.clone());
            }

            for &(j, a) in &row.coeffs {
                let (cmin, cmax) = contributions(a, lower[j], upper[j]);
                // From the <= side: a_j x_j <= rhs - min(others).
                if check_le {
                    if let Some(others) = min_act.without(cmin) {
                        let residual = row.rhs - others;
                        changed |= apply_bound(j, a, residual, true, lower, upper, is_integer);
                    }
                }
                // From the >= side: a_j x_j >= rhs - max(others).
                if check_ge {
                    if let Some(others) = max_act.without(-cmax) {
                        let residual = row.rhs - (-others);
                        changed |= apply_bound(j, a, residual, false, lower, upper, is_integer);
                    }
                }
                if lower[j] > upper[j] + EPS {
                    return Err(row.name.clone());
                }
            }
        }
        any_change |= changed;
        if !changed {
            break;
        }
    }
    Ok(any_change)
}

fn feas_eps(rhs: f64) -> f64 {
    1e-7 * (1.0 + rhs.abs())
}

/// Cheapest and dearest contribution of `a * x` for `x` in `[l, u]`.
fn contributions(a: f64, l: f64, u: f64) -> (f64, f64) {
    if a > 0.0 {
        (a * l, a * u)
    } else {
        (a * u, a * l)
    }
}

/// Applies `a * x (<=|>=) residual`; returns true when a bound moved.
fn apply_bound(
    j: usize,
    a: f64,
    residual: f64,
    upper_side: bool,
    lower: &mut [f64],
    upper: &mut [f64],
    is_integer: &[bool],
) -> bool {
    let limit = residual / a;
    // x <= limit when (<=, a > 0) or (>=, a < 0); x >= limit otherwise.
    let tightens_upper = upper_side == (a > 0.0);
    if tightens_upper {
        let mut new_upper = limit;
        if is_integer[j] {
            new_upper = (new_upper + EPS).floor();
        }
        if new_upper < upper[j] - EPS {
            upper[j] = new_upper;
            return true;
        }
    } else {
        let mut new_lower = limit;
        if is_integer[j] {
            new_lower = (new_lower - EPS).ceil();
        }
        if new_lower > lower[j] + EPS {
            lower[j] = new_lower;
            return true;
        }
    }
    false
}
