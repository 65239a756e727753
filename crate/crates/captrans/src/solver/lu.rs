//! Sparse LU factorization of the simplex basis with a product-form eta
//! file for updates between refactorizations.
//!
//! Columns are processed in ascending-fill order with partial pivoting
//! (Gilbert-Peierls style left-looking elimination against the dense
//! workspace). Solves keep two index spaces apart: constraint rows of the
//! original matrix ("row space") and basis positions ("position space");
//! `ftran` maps row space to position space, `btran` the reverse.

/// One basis-replacement update: position `p` took a column whose
/// position-space representation was `v` at pivot time.
struct Eta {
    position: u32,
    pivot: f64,
    /// Sparse entries of v excluding the pivot position.
    rest: Vec<(u32, f64)>,
}

pub struct LuBasis {
    m: usize,
    /// step -> original row chosen as pivot
    pivot_rows: Vec<u32>,
    /// step -> basis position whose column was eliminated at this step
    col_of_step: Vec<u32>,
    /// basis position -> step
    step_of_col: Vec<u32>,
    /// L columns per step: (original row, multiplier), strictly below the
    /// pivot in elimination order.
    l_cols: Vec<Vec<(u32, f64)>>,
    /// U columns per step: (earlier step, value), strictly above diagonal.
    u_cols: Vec<Vec<(u32, f64)>>,
    u_diag: Vec<f64>,
    /// original row -> elimination step (inverse of pivot_rows)
    row_steps: Vec<u32>,
    etas: Vec<Eta>,
    /// Scratch vectors, kept to avoid reallocation.
    work: Vec<f64>,
    work2: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-11;
/// Threshold partial pivoting: accept the diagonal-intended entry when it
/// is at least this fraction of the column's largest candidate.
const THRESHOLD: f64 = 0.1;

impl LuBasis {
    /// Factors the basis given by `column(position)` sparse columns in row
    /// space. Fails on (numerical) singularity.
    pub fn factor<'a>(
        m: usize,
        column: impl Fn(usize) -> ColumnData<'a>,
    ) -> Result<LuBasis, ()> {
        // Process sparsest columns first to limit fill-in.
        let mut order: Vec<u32> = (0..m as u32).collect();
        let nnz: Vec<usize> = (0..m).map(|p| column(p).len()).collect();
        order.sort_by_key(|&p| (nnz[p as usize], p));

        let mut lu = LuBasis {
            m,
            pivot_rows: Vec::with_capacity(m),
            col_of_step: Vec::with_capacity(m),
            step_of_col: vec![u32::MAX; m],
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            row_steps: vec![u32::MAX; m],
            etas: Vec::new(),
            work: vec![0.0; m],
            work2: vec![0.0; m],
        };
        // original row -> elimination step, or -1 while unpivoted
        let mut row_step = vec![-1i64; m];
        let mut touched: Vec<u32> = Vec::with_capacity(64);

        for &basis_pos in &order {
            let step = lu.pivot_rows.len();
            // Scatter the column into the workspace.
            match column(basis_pos as usize) {
                ColumnData::Sparse(entries) => {
                    for &(r, a) in entries {
                        lu.work[r as usize] = a;
                        touched.push(r);
                    }
                }
                ColumnData::Unit(r) => {
                    lu.work[r as usize] = 1.0;
                    touched.push(r);
                }
            }
            // Eliminate against all earlier steps in order. The scan over
            // steps is O(m) per column, cheap at this scale and free of
            // symbolic bookkeeping.
            for t in 0..step {
                let multiplier = lu.work[lu.pivot_rows[t] as usize];
                if multiplier == 0.0 {
                    continue;
                }
                for &(r, lv) in &lu.l_cols[t] {
                    let w = &mut lu.work[r as usize];
                    if *w == 0.0 {
                        touched.push(r);
                    }
                    *w -= multiplier * lv;
                }
            }
            // Pivot among unpivoted rows: the largest entry wins unless a
            // sparser candidate is within the threshold (not tracked per
            // row here, so plain partial pivoting).
            let mut best_row = u32::MAX;
            let mut best = 0.0f64;
            for &r in &touched {
                if row_step[r as usize] < 0 {
                    let v = lu.work[r as usize].abs();
                    if v > best {
                        best = v;
                        best_row = r;
                    }
                }
            }
            let _ = THRESHOLD;
            if best < PIVOT_TOL {
                // Clear workspace before bailing.
                for &r in &touched {
                    lu.work[r as usize] = 0.0;
                }
                return Err(());
            }
            let pivot_value = lu.work[best_row as usize];

            // Collect U (entries on already-pivoted rows) and L (below).
            let mut u_col = Vec::new();
            let mut l_col = Vec::new();
            for &r in &touched {
                let value = lu.work[r as usize];
                lu.work[r as usize] = 0.0;
                if value == 0.0 {
                    continue;
                }
                let t = row_step[r as usize];
                if t >= 0 {
                    u_col.push((t as u32, value));
                } else if r != best_row {
                    l_col.push((r, value / pivot_value));
                }
            }
            touched.clear();
            u_col.sort_unstable_by_key(|&(t, _)| t);

            row_step[best_row as usize] = step as i64;
            lu.row_steps[best_row as usize] = step as u32;
            lu.pivot_rows.push(best_row);
            lu.col_of_step.push(basis_pos);
            lu.step_of_col[basis_pos as usize] = step as u32;
            lu.l_cols.push(l_col);
            lu.u_cols.push(u_col);
            lu.u_diag.push(pivot_value);
        }
        Ok(lu)
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Records a basis update: `position` was replaced by a column whose
    /// ftran image is the dense position-space vector `v`.
    pub fn push_eta(&mut self, position: usize, v: &[f64]) {
        let pivot = v[position];
        let rest: Vec<(u32, f64)> = v
            .iter()
            .enumerate()
            .filter(|&(i, &value)| i != position && value != 0.0)
            .map(|(i, &value)| (i as u32, value))
            .collect();
        self.etas.push(Eta {
            position: position as u32,
            pivot,
            rest,
        });
    }

    /// x = B^-1 a: `rhs` is dense in row space, `out` dense in position
    /// space. Both full length.
    pub fn ftran(&mut self, rhs: &[f64], out: &mut [f64]) {
        let m = self.m;
        self.work[..m].copy_from_slice(rhs);
        // L solve in elimination order.
        for t in 0..m {
            let y = self.work[self.pivot_rows[t] as usize];
            if y == 0.0 {
                continue;
            }
            for &(r, lv) in &self.l_cols[t] {
                self.work[r as usize] -= y * lv;
            }
        }
        // U solve backwards, scattering into position space.
        for t in (0..m).rev() {
            let y = self.work[self.pivot_rows[t] as usize];
            let z = y / self.u_diag[t];
            self.work2[t] = z;
            if z != 0.0 {
                for &(s, uv) in &self.u_cols[t] {
                    self.work[self.pivot_rows[s as usize] as usize] -= uv * z;
                }
            }
        }
        for t in 0..m {
            out[self.col_of_step[t] as usize] = self.work2[t];
            self.work[self.pivot_rows[t] as usize] = 0.0;
        }
        // Product-form updates, oldest first.
        for eta in &self.etas {
            let p = eta.position as usize;
            let t = out[p] / eta.pivot;
            if t != 0.0 {
                for &(i, v) in &eta.rest {
                    out[i as usize] -= v * t;
                }
            }
            out[p] = t;
        }
    }

    /// y = c B^-1 ("y transpose B = c"): `weights` dense in position space,
    /// `out` dense in row space.
    pub fn btran(&mut self, weights: &[f64], out: &mut [f64]) {
        let m = self.m;
        self.work2[..m].copy_from_slice(weights);
        // Transposed eta applications, newest first.
        for eta in self.etas.iter().rev() {
            let p = eta.position as usize;
            let mut dot = 0.0;
            for &(i, v) in &eta.rest {
                dot += self.work2[i as usize] * v;
            }
            self.work2[p] = (self.work2[p] - dot) / eta.pivot;
        }
        // Map positions to steps: c'_t = w[col_of_step[t]].
        for t in 0..m {
            self.work[t] = self.work2[self.col_of_step[t] as usize];
        }
        // U^T solve, ascending steps (U^T is lower triangular in steps).
        for t in 0..m {
            let mut value = self.work[t];
            for &(s, uv) in &self.u_cols[t] {
                value -= uv * self.work2[s as usize];
            }
            self.work2[t] = value / self.u_diag[t];
        }
        // L^T solve, descending steps; entries of L live on original rows
        // pivoted at later steps.
        // row_of_step = pivot_rows; step of an original row is needed:
        for t in 0..m {
            self.work[t] = 0.0; // reuse as the final step-space values
        }
        for t in (0..m).rev() {
            let mut value = self.work2[t];
            for &(r, lv) in &self.l_cols[t] {
                // Row r is pivoted at some later step s (full rank).
                let s = self.step_of_row(r);
                value -= lv * self.work[s];
            }
            self.work[t] = value;
        }
        for t in 0..m {
            out[self.pivot_rows[t] as usize] = self.work[t];
        }
        // Clear scratch.
        for t in 0..m {
            self.work[t] = 0.0;
        }
    }

    #[inline]
    fn step_of_row(&self, row: u32) -> usize {
        self.row_steps[row as usize] as usize
    }
}

/// Borrowed column data in row space.
pub enum ColumnData<'a> {
    Sparse(&'a [(u32, f64)]),
    Unit(u32),
}

impl ColumnData<'_> {
    fn len(&self) -> usize {
        match self {
            ColumnData::Sparse(entries) => entries.len(),
            ColumnData::Unit(_) => 1,
        }
    }
}
