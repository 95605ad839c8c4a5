//! Lowering to Clarabel's standard form min qᵀx s.t. Ax + s = b, s ∈ K.
//!
//! Each IR row e(x) = aᵀx + c becomes one slack s = e(x), i.e. an A row of
//! −a and b = c. PSD blocks use Clarabel's scaled upper-triangle vector.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    SupportedConeT::{NonnegativeConeT, PSDTriangleConeT, SecondOrderConeT, ZeroConeT},
};

use super::program::{AffineExpr, ConeBlock, ConicProgram};
use super::{Solution, SolveOptions, SolveStatus};
use crate::error::{Error, Result};

struct Lowered {
    rows_i: Vec<usize>,
    cols_j: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

impl Lowered {
    fn push_row(&mut self, e: &AffineExpr, scale: f64) {
        let r = self.b.len();
        for &(j, c) in &e.terms {
            if c != 0.0 {
                self.rows_i.push(r);
                self.cols_j.push(j);
                self.vals.push(-c * scale);
            }
        }
        self.b.push(e.constant * scale);
    }

    fn push_sym(&mut self, entries: &[AffineExpr], n: usize, i: usize, j: usize) {
        if i == j {
            self.push_row(&entries[i * n + i], 1.0);
        } else {
            let avg = entries[i * n + j].clone().add_scaled(&entries[j * n + i], 1.0).scaled(0.5);
            self.push_row(&avg, std::f64::consts::SQRT_2);
        }
    }
}

fn lower(p: &ConicProgram) -> Lowered {
    let mut l = Lowered {
        rows_i: Vec::new(),
        cols_j: Vec::new(),
        vals: Vec::new(),
        b: Vec::new(),
        cones: Vec::new(),
    };
    let n_eq: usize = p.equalities.iter().map(|b| b.rows.len()).sum();
    for block in &p.equalities {
        for r in &block.rows {
            l.push_row(r, 1.0);
        }
    }
    if n_eq > 0 {
        l.cones.push(ZeroConeT(n_eq));
    }
    for c in &p.cones {
        match c {
            ConeBlock::Nonnegative { rows, .. } => {
                for r in rows {
                    l.push_row(r, 1.0);
                }
                l.cones.push(NonnegativeConeT(rows.len()));
            }
            ConeBlock::SecondOrder { rows, .. } => {
                for r in rows {
                    l.push_row(r, 1.0);
                }
                l.cones.push(SecondOrderConeT(rows.len()));
            }
            ConeBlock::PositiveSemidefinite { order, entries, .. } => {
                let n = *order;
                // Upper triangle, column by column.
                for j in 0..n {
                    for i in 0..=j {
                        l.push_sym(entries, n, i, j);
                    }
                }
                l.cones.push(PSDTriangleConeT(n));
            }
        }
    }
    l
}

fn unpack_svec(z: &[f64], n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            let v = if i == j { z[k] } else { z[k] / std::f64::consts::SQRT_2 };
            m[i * n + j] = v;
            m[j * n + i] = v;
            k += 1;
        }
    }
    m
}

pub(super) fn solve(p: &ConicProgram, opts: &SolveOptions) -> Result<Solution> {
    let l = lower(p);
    let m = l.b.len();
    let a = CscMatrix::new_from_triplets(m, p.num_vars, l.rows_i, l.cols_j, l.vals);
    let pmat = CscMatrix::zeros((p.num_vars, p.num_vars));
    let settings = DefaultSettings {
        verbose: false,
        tol_gap_abs: opts.tol,
        tol_gap_rel: opts.tol,
        tol_feas: opts.tol,
        max_iter: opts.max_iter,
        ..Default::default()
    };
    let mut solver = DefaultSolver::new(&pmat, &p.objective, &a, &l.b, &l.cones, settings)
        .map_err(|e| Error::Backend(format!("clarabel setup failed: {e}")))?;
    solver.solve();
    let sol = &solver.solution;
    let (status, reduced) = match sol.status {
        SolverStatus::Solved => (SolveStatus::Optimal, false),
        SolverStatus::AlmostSolved => (SolveStatus::Optimal, true),
        SolverStatus::PrimalInfeasible => (SolveStatus::Infeasible, false),
        SolverStatus::DualInfeasible => (SolveStatus::Unbounded, false),
        _ => (SolveStatus::NumericalLimit, false),
    };

    let mut k = 0;
    let mut dual_equalities = Vec::with_capacity(p.equalities.len());
    for block in &p.equalities {
        dual_equalities.push(sol.z[k..k + block.rows.len()].to_vec());
        k += block.rows.len();
    }
    let mut dual_cones = Vec::with_capacity(p.cones.len());
    for c in &p.cones {
        match c {
            ConeBlock::Nonnegative { rows, .. } | ConeBlock::SecondOrder { rows, .. } => {
                dual_cones.push(sol.z[k..k + rows.len()].to_vec());
                k += rows.len();
            }
            ConeBlock::PositiveSemidefinite { order, .. } => {
                let len = order * (order + 1) / 2;
                dual_cones.push(unpack_svec(&sol.z[k..k + len], *order));
                k += len;
            }
        }
    }

    Ok(Solution {
        status,
        objective: p.objective_value(&sol.x),
        primal: sol.x.clone(),
        dual_equalities,
        dual_cones,
        iterations: sol.iterations as usize,
        reduced_accuracy: reduced,
    })
}
