//! Sparse symmetric matrices and the conjugate gradient kernel shared by the
//! center solve and the damped least-squares radius steps.

/// Anything that can compute `out = A x` for a symmetric positive definite `A`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Diagonal entries, used by the Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// the order given.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        // stable: keeps summation order of duplicates deterministic
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        m
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Absolute bound on the residual 2-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// 2-norm of `b − A x`, recomputed from the returned solution.
    pub residual_norm: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Iterate of the (preconditioned) conjugate gradient method.
#[derive(Debug, Clone)]
pub struct CgState {
    pub solution: Vec<f64>,
    pub residual: Vec<f64>,
    pub direction: Vec<f64>,
    /// Step length of the last update along `direction`.
    pub step_length: f64,
    preconditioned: Vec<f64>,
    rz: f64,
    inv_diag: Option<Vec<f64>>,
    scratch: Vec<f64>,
}

impl CgState {
    pub fn new<A: LinearOperator>(
        a: &A,
        rhs: &[f64],
        start: Vec<f64>,
        preconditioner: Preconditioner,
    ) -> Self {
        let n = a.dim();
        assert_eq!(rhs.len(), n);
        assert_eq!(start.len(), n);
        let inv_diag = match preconditioner {
            Preconditioner::None => None,
            Preconditioner::Jacobi => Some(
                a.diagonal()
                    .into_iter()
                    .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
                    .collect(),
            ),
        };
        let mut state = Self {
            solution: start,
            residual: vec![0.0; n],
            direction: vec![0.0; n],
            step_length: 0.0,
            preconditioned: vec![0.0; n],
            rz: 0.0,
            inv_diag,
            scratch: vec![0.0; n],
        };
        state.restart(a, rhs);
        state
    }

    /// Recomputes the residual from the current solution and resets the
    /// search direction.
    fn restart<A: LinearOperator>(&mut self, a: &A, rhs: &[f64]) {
        a.apply(&self.solution, &mut self.scratch);
        for ((r, b), ax) in self.residual.iter_mut().zip(rhs).zip(&self.scratch) {
            *r = b - ax;
        }
        self.precondition();
        self.direction.copy_from_slice(&self.preconditioned);
        self.rz = dot(&self.residual, &self.preconditioned);
    }

    fn precondition(&mut self) {
        match &self.inv_diag {
            None => self.preconditioned.copy_from_slice(&self.residual),
            Some(inv) => {
                for ((z, r), d) in self.preconditioned.iter_mut().zip(&self.residual).zip(inv) {
                    *z = r * d;
                }
            }
        }
    }

    pub fn residual_norm(&self) -> f64 {
        norm(&self.residual)
    }

    /// One CG update. Returns `false` on breakdown (`pᵀAp ≤ 0`).
    pub fn step<A: LinearOperator>(&mut self, a: &A) -> bool {
        a.apply(&self.direction, &mut self.scratch);
        let curvature = dot(&self.direction, &self.scratch);
        if !(curvature > 0.0) {
            return false;
        }
        let alpha = self.rz / curvature;
        self.step_length = alpha;
        for (x, p) in self.solution.iter_mut().zip(&self.direction) {
            *x += alpha * p;
        }
        for (r, ap) in self.residual.iter_mut().zip(&self.scratch) {
            *r -= alpha * ap;
        }
        self.precondition();
        let rz_new = dot(&self.residual, &self.preconditioned);
        let beta = rz_new / self.rz;
        for (p, z) in self.direction.iter_mut().zip(&self.preconditioned) {
            *p = z + beta * *p;
        }
        self.rz = rz_new;
        true
    }
}

/// Runs CG from `start` until `‖b − A x‖₂ < tolerance` or the iteration cap.
///
/// Convergence of the recursive residual is confirmed against the true
/// residual; on mismatch the iteration restarts from the true residual.
pub fn conjugate_gradient<A: LinearOperator>(
    a: &A,
    rhs: &[f64],
    start: Vec<f64>,
    opts: &CgOptions,
) -> CgOutcome {
    let mut state = CgState::new(a, rhs, start, opts.preconditioner);
    let mut iterations = 0;
    let true_residual = |s: &CgState, scratch: &mut Vec<f64>| {
        a.apply(&s.solution, scratch);
        let r: Vec<f64> = rhs.iter().zip(scratch.iter()).map(|(b, ax)| b - ax).collect();
        norm(&r)
    };
    let mut scratch = vec![0.0; a.dim()];
    loop {
        if state.residual_norm() < opts.tolerance {
            let actual = true_residual(&state, &mut scratch);
            if actual < opts.tolerance {
                return CgOutcome {
                    solution: state.solution,
                    iterations,
                    residual_norm: actual,
                    converged: true,
                };
            }
            state.restart(a, rhs);
            if state.residual_norm() < opts.tolerance {
                // recomputation disagrees with itself only at round-off level
                continue;
            }
        }
        if iterations >= opts.max_iterations || !state.step(a) {
            break;
        }
        iterations += 1;
    }
    let residual_norm = true_residual(&state, &mut scratch);
    CgOutcome {
        solution: state.solution,
        iterations,
        residual_norm,
        converged: residual_norm < opts.tolerance,
    }
}
