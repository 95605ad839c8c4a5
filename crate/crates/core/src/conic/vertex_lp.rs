//! Dependency-free LP fallback: enumerate basic solutions.
//!
//! Only usable for tiny linear programs whose feasible set is bounded. A
//! vertex is a point where the equality rows plus some set of inequality
//! rows hold with equality and have full rank; the best feasible vertex is
//! optimal when the feasible set is a polytope.

use nalgebra::{DMatrix, DVector};

use super::program::{AffineExpr, ConeBlock, ConicProgram};
use super::{Solution, SolveOptions, SolveStatus};
use crate::error::{Error, Result};

const MAX_SUBSETS: u128 = 2_000_000;

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let tol = 1e-10 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

fn row_matrix(rows: &[&AffineExpr], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(rows.len(), n);
    let mut b = DVector::zeros(rows.len());
    for (r, e) in rows.iter().enumerate() {
        for &(j, c) in &e.terms {
            a[(r, j)] += c;
        }
        b[r] = -e.constant;
    }
    (a, b)
}

pub(super) fn solve(p: &ConicProgram, opts: &SolveOptions) -> Result<Solution> {
    let n = p.num_vars;
    let eq: Vec<&AffineExpr> = p.equalities.iter().flat_map(|b| &b.rows).collect();
    let mut ineq: Vec<&AffineExpr> = Vec::new();
    for c in &p.cones {
        match c {
            ConeBlock::Nonnegative { rows, .. } => ineq.extend(rows),
            _ => {
                return Err(Error::Backend(format!(
                    "vertex LP backend only handles linear programs; cone {} is not linear",
                    c.name()
                )))
            }
        }
    }
    let (ae, be) = row_matrix(&eq, n);
    let (ai, bi) = row_matrix(&ineq, n);
    let need = n.saturating_sub(rank(&ae));
    if binom(ineq.len(), need) > MAX_SUBSETS {
        return Err(Error::Backend(format!(
            "vertex enumeration over C({}, {need}) subsets is too large",
            ineq.len()
        )));
    }
    let feas_tol = opts.tol.max(1e-9) * 10.0;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0usize;
    let mut subset: Vec<usize> = (0..need).collect();
    loop {
        if need <= ineq.len() {
            iterations += 1;
            let rows = eq.len() + need;
            let mut a = DMatrix::zeros(rows, n);
            let mut b = DVector::zeros(rows);
            a.rows_mut(0, eq.len()).copy_from(&ae);
            b.rows_mut(0, eq.len()).copy_from(&be);
            for (k, &s) in subset.iter().enumerate() {
                a.row_mut(eq.len() + k).copy_from(&ai.row(s));
                b[eq.len() + k] = bi[s];
            }
            if rank(&a) == n {
                let svd = a.clone().svd(true, true);
                if let Ok(x) = svd.solve(&b, 1e-12) {
                    let xv: Vec<f64> = x.iter().copied().collect();
                    let eq_ok = eq.iter().all(|e| e.eval(&xv).abs() <= feas_tol);
                    let in_ok = ineq.iter().all(|e| e.eval(&xv) >= -feas_tol);
                    if eq_ok && in_ok {
                        let obj = p.objective_value(&xv);
                        if best.as_ref().map_or(true, |(v, _)| obj < *v - 1e-12) {
                            best = Some((obj, xv));
                        }
                    }
                }
            }
        }
        // Next k-combination in lexicographic order.
        let mut i = need;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if subset[i] < ineq.len() - need + i {
                subset[i] += 1;
                for k in (i + 1)..need {
                    subset[k] = subset[k - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }

    Ok(match best {
        Some((obj, x)) => Solution {
            status: SolveStatus::Optimal,
            objective: obj,
            primal: x,
            dual_equalities: Vec::new(),
            dual_cones: Vec::new(),
            iterations,
            reduced_accuracy: false,
        },
        None => Solution {
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            primal: vec![f64::NAN; n],
            dual_equalities: Vec::new(),
            dual_cones: Vec::new(),
            iterations,
            reduced_accuracy: false,
        },
    })
}
