//! Brute-force adversary that lower-bounds the worst-case conditional loss,
//! plus the plain conditional sample average.
//!
//! The adversary moves a fraction υᵢ of each sample into the fiber, spread
//! over grid atoms in 𝒴, and leaves the rest outside. For fixed υ the best
//! spread is an LP with one budget row and one simplex row per sample. Its
//! optimum is the greedy fill along each sample's upper concave hull of
//! (cost, loss) points, taken globally in order of decreasing slope; this
//! is the same optimum basic-solution enumeration finds, in O(G log G).

mod lp;
mod saa;
pub mod validation;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lp::{eps_lower_lp, rho_min_lp};
pub use saa::{saa_conditional_loss, saa_conditional_loss_with_cost};

use crate::error::{Error, RegimeKind, Result};
use crate::feasibility::{rho_min, REGIME_TOL};
use crate::geometry::{compute_geometry, radial_point, GeometryStats};
use crate::loss::loss_of_return;
use crate::reformulations::ProblemSpec;
use crate::types::Transport;

/// Box grid over 𝒴.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: usize,
}

impl GridSpec {
    pub fn uniform(m: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        let g = GridSpec {
            lower: vec![lo; m],
            upper: vec![hi; m],
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::Dimension("grid bounds must share a non-zero length".into()));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points per dimension".into()));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidParameter("grid bounds must be finite with lower < upper".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Every grid point, last coordinate fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let axes: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                (0..self.points)
                    .map(|k| self.lower[j] + (self.upper[j] - self.lower[j]) * k as f64 / (self.points - 1) as f64)
                    .collect()
            })
            .collect();
        let total = self.points.pow(m as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; m];
                for j in (0..m).rev() {
                    p[j] = axes[j][idx % self.points];
                    idx /= self.points;
                }
                p
            })
            .collect()
    }
}

/// One point mass of a per-sample transport plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub mass: f64,
}

/// Discrete adversary distribution, one plan per empirical sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseDistribution {
    pub plans: Vec<Vec<Atom>>,
    /// υᵢ: mass of plan i inside the fiber.
    pub fiber_mass: Vec<f64>,
    /// (1/N) Σᵢ Σ_atoms cost · mass.
    pub transport_cost: f64,
    pub value: f64,
}

impl WorstCaseDistribution {
    /// Re-derives every invariant from the raw atoms and compares it with
    /// the stored summary and the spec's budget and mass floor.
    pub fn verify(&self, alpha: &[f64], beta: f64, spec: &ProblemSpec, tol: f64) -> Result<()> {
        let n = spec.n_samples();
        if self.plans.len() != n {
            return Err(Error::Numeric(format!("{} plans for {n} samples", self.plans.len())));
        }
        let cost_fn = &spec.cost;
        let mut cost = 0.0;
        let mut fiber_total = 0.0;
        let mut loss_total = 0.0;
        for (i, plan) in self.plans.iter().enumerate() {
            let s = &spec.data.samples()[i];
            let mass: f64 = plan.iter().map(|a| a.mass).sum();
            if (mass - 1.0).abs() > tol || plan.iter().any(|a| a.mass < -tol) {
                return Err(Error::Numeric(format!("plan {i} has total mass {mass}")));
            }
            let mut in_fiber = 0.0;
            for a in plan {
                cost += a.mass * (cost_fn.x_cost.cost(&a.x, &s.x) + cost_fn.y_cost(&a.y, &s.y));
                if cost_fn.x_cost.cost(&a.x, &spec.fiber.x0) <= fiber_threshold(spec.fiber.gamma) {
                    in_fiber += a.mass;
                    loss_total += a.mass * loss_of_return(crate::loss::dot(&a.y, alpha), beta, &spec.loss);
                }
            }
            if (in_fiber - self.fiber_mass[i]).abs() > tol {
                return Err(Error::Numeric(format!(
                    "plan {i}: fiber mass {in_fiber} differs from stored {}",
                    self.fiber_mass[i]
                )));
            }
            fiber_total += in_fiber;
        }
        cost /= n as f64;
        if cost > spec.ambiguity.rho + tol {
            return Err(Error::Numeric(format!("transport cost {cost} exceeds rho = {}", spec.ambiguity.rho)));
        }
        if fiber_total / (n as f64) < spec.ambiguity.eps - tol {
            return Err(Error::Numeric(format!(
                "fiber probability {} below eps = {}",
                fiber_total / n as f64,
                spec.ambiguity.eps
            )));
        }
        if fiber_total <= 0.0 {
            return Err(Error::Numeric("distribution puts no mass on the fiber".into()));
        }
        let value = loss_total / fiber_total;
        if (value - self.value).abs() > tol * (1.0 + value.abs()) {
            return Err(Error::Numeric(format!("recomputed value {value} differs from stored {}", self.value)));
        }
        if (cost - self.transport_cost).abs() > tol {
            return Err(Error::Numeric(format!(
                "recomputed cost {cost} differs from stored {}",
                self.transport_cost
            )));
        }
        Ok(())
    }
}

/// Fiber membership threshold with a relative allowance for rounding in
/// radial points that sit exactly on the boundary.
fn fiber_threshold(gamma: f64) -> f64 {
    gamma * (1.0 + 1e-12) + 1e-15
}

/// Radial offset past the boundary used for mass leaving the fiber.
const EXIT_MARGIN: f64 = 1e-6;

/// Number of υ levels per sample: 0, 0.1, …, 1.
pub const UPSILON_LEVELS: usize = 11;

struct Hull {
    /// Cheapest atom (grid index; `usize::MAX` is ŷᵢ).
    base: usize,
    base_cost: f64,
    base_loss: f64,
    /// (Δcost, Δloss, atom reached) per segment, slopes decreasing.
    segments: Vec<(f64, f64, usize)>,
}

fn upper_hull(points: &[(f64, f64, usize)]) -> Hull {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    // Keep the best loss per cost level and drop points that do not
    // improve on the running maximum loss.
    let mut mono: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts {
        if mono.last().map_or(true, |q| p.1 > q.1 && p.0 > q.0) {
            mono.push(p);
        }
    }
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for p in mono {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Remove b if it lies on or below segment a → p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let base = hull[0];
    Hull {
        base: base.2,
        base_cost: base.0,
        base_loss: base.1,
        segments: hull.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1, w[1].2)).collect(),
    }
}

struct Prepared {
    hulls: Vec<Hull>,
    /// (sample, segment) in decreasing slope order.
    order: Vec<(usize, usize)>,
    /// Cost of mass leaving (or staying out of) the fiber.
    exit_cost: Vec<f64>,
    exit_point: Vec<Vec<f64>>,
    /// x-location of mass placed in the fiber.
    entry_point: Vec<Vec<f64>>,
}

fn prepare(alpha: &[f64], beta: f64, spec: &ProblemSpec, geo: &GeometryStats, grid: &[Vec<f64>]) -> Prepared {
    let n = spec.n_samples();
    let gamma = spec.fiber.gamma;
    let x0 = &spec.fiber.x0;
    let grid_loss: Vec<f64> = grid
        .iter()
        .map(|y| loss_of_return(crate::loss::dot(y, alpha), beta, &spec.loss))
        .collect();
    let mut hulls = Vec::with_capacity(n);
    let mut exit_cost = Vec::with_capacity(n);
    let mut exit_point = Vec::with_capacity(n);
    let mut entry_point = Vec::with_capacity(n);
    for i in 0..n {
        let s = &spec.data.samples()[i];
        let inside = spec.cost.x_cost.cost(&s.x, x0) <= gamma;
        let (entry, entry_cost) = if inside {
            (s.x.clone(), 0.0)
        } else {
            (geo.projections[i].clone(), geo.kappa[i])
        };
        let (exit, ecost) = if inside {
            let p = radial_point(&s.x, x0, gamma.sqrt() + EXIT_MARGIN, &spec.cost.x_cost);
            let c = spec.cost.x_cost.cost(&p, &s.x);
            (p, c)
        } else {
            (s.x.clone(), 0.0)
        };
        let mut pts: Vec<(f64, f64, usize)> = grid
            .iter()
            .enumerate()
            .map(|(g, y)| (entry_cost + spec.cost.y_cost(y, &s.y), grid_loss[g], g))
            .collect();
        pts.push((
            entry_cost,
            loss_of_return(crate::loss::dot(&s.y, alpha), beta, &spec.loss),
            usize::MAX,
        ));
        hulls.push(upper_hull(&pts));
        exit_cost.push(ecost);
        exit_point.push(exit);
        entry_point.push(entry);
    }
    let mut order: Vec<(usize, usize)> = hulls
        .iter()
        .enumerate()
        .flat_map(|(i, h)| (0..h.segments.len()).map(move |k| (i, k)))
        .collect();
    order.sort_by(|&(i, k), &(j, l)| {
        let si = hulls[i].segments[k].1 / hulls[i].segments[k].0;
        let sj = hulls[j].segments[l].1 / hulls[j].segments[l].0;
        sj.total_cmp(&si).then(i.cmp(&j)).then(k.cmp(&l))
    });
    Prepared {
        hulls,
        order,
        exit_cost,
        exit_point,
        entry_point,
    }
}

/// Inner LP at fixed υ: (Σ mass·loss inside the fiber, per-segment fill
/// fractions). `None` when even the cheapest placement breaks the budget.
fn inner(p: &Prepared, ups: &[f64], budget_total: f64) -> Option<(f64, Vec<Vec<f64>>)> {
    let mut budget = budget_total;
    let mut value = 0.0;
    for (i, h) in p.hulls.iter().enumerate() {
        budget -= ups[i] * h.base_cost + (1.0 - ups[i]) * p.exit_cost[i];
        value += ups[i] * h.base_loss;
    }
    if budget < -1e-12 * (1.0 + budget_total.abs()) {
        return None;
    }
    budget = budget.max(0.0);
    let mut fill: Vec<Vec<f64>> = p.hulls.iter().map(|h| vec![0.0; h.segments.len()]).collect();
    for &(i, k) in &p.order {
        if budget <= 0.0 {
            break;
        }
        let (dc, dl, _) = p.hulls[i].segments[k];
        let need = ups[i] * dc;
        if need <= 0.0 {
            continue;
        }
        let f = (budget / need).min(1.0);
        fill[i][k] = f;
        value += f * ups[i] * dl;
        budget -= f * need;
    }
    Some((value, fill))
}

/// Points of {υ ∈ [0,1]ᴺ : Σ υᵢ = Nε} with every coordinate but one on the
/// level grid; the remaining one is solved from the sum. Vertices of the
/// slice have this form, so the greedy ρ_min plan is always a candidate.
fn upsilon_candidates(n: usize, eps: f64, allow_excess: bool) -> Vec<Vec<f64>> {
    let levels: Vec<f64> = (0..UPSILON_LEVELS).map(|k| k as f64 / (UPSILON_LEVELS - 1) as f64).collect();
    let target = n as f64 * eps;
    let mut out = Vec::new();
    let total = UPSILON_LEVELS.pow(n as u32 - 1);
    for free in (0..n).rev() {
        for mut idx in 0..total {
            let mut u = vec![0.0; n];
            for (j, slot) in u.iter_mut().enumerate() {
                if j != free {
                    *slot = levels[idx % UPSILON_LEVELS];
                    idx /= UPSILON_LEVELS;
                }
            }
            let rest = target - u.iter().sum::<f64>();
            if (-1e-12..=1.0 + 1e-12).contains(&rest) {
                u[free] = rest.clamp(0.0, 1.0);
                out.push(u.clone());
            }
            // Mass above Nε only helps when leaving the fiber costs extra.
            if allow_excess && free == n - 1 {
                for &lv in &levels {
                    let mut v = u.clone();
                    v[free] = lv;
                    if v.iter().sum::<f64>() > target + 1e-12 {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

/// Best discrete adversary found on `grid`; a lower bound on the
/// worst-case conditional loss at (α, β).
pub fn worst_case_bruteforce(
    alpha: &[f64],
    beta: f64,
    spec: &ProblemSpec,
    grid: &GridSpec,
) -> Result<(f64, WorstCaseDistribution)> {
    spec.validate()?;
    grid.validate()?;
    if grid.dim() != spec.m() || alpha.len() != spec.m() {
        return Err(Error::Dimension("grid, alpha and returns must share dimension m".into()));
    }
    if spec.ambiguity.transport != Transport::Type1 {
        return Err(Error::regime(RegimeKind::WrongBuilder, "the oracle covers type-1 transport only"));
    }
    let eps = spec.ambiguity.eps;
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("the oracle needs eps > 0".into()));
    }
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let rmin = rho_min(&geo.kappa, eps)?;
    if spec.ambiguity.rho < rmin - REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            format!("rho = {} is below rho_min = {rmin}", spec.ambiguity.rho),
        ));
    }
    let n = spec.n_samples();
    let atoms = grid.points();
    let prep = prepare(alpha, beta, spec, &geo, &atoms);
    let budget = n as f64 * spec.ambiguity.rho;
    let cands = upsilon_candidates(n, eps, !spec.fiber.is_singleton());

    let best = cands
        .par_iter()
        .enumerate()
        .filter_map(|(ci, u)| {
            let total: f64 = u.iter().sum();
            if total <= 0.0 {
                return None;
            }
            inner(&prep, u, budget).map(|(v, _)| (v / total, ci))
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let Some((_, ci)) = best else {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            "no fiber allocation on the search grid fits the transport budget",
        ));
    };
    let ups = &cands[ci];
    let (raw, fill) = inner(&prep, ups, budget).expect("candidate was feasible");
    let total: f64 = ups.iter().sum();

    let mut plans = Vec::with_capacity(n);
    let mut cost = 0.0;
    for i in 0..n {
        let s = &spec.data.samples()[i];
        let h = &prep.hulls[i];
        let y_of = |g: usize| if g == usize::MAX { s.y.clone() } else { atoms[g].clone() };
        // Walking the hull, mass sits at the last vertex reached; a partial
        // segment splits it between the two ends.
        let mut weights: Vec<(usize, f64)> = vec![(h.base, 1.0)];
        for (k, &(_, _, to)) in h.segments.iter().enumerate() {
            let f = fill[i][k];
            if f <= 0.0 {
                break;
            }
            let last = weights.last_mut().expect("nonempty");
            last.1 -= f;
            weights.push((to, f));
        }
        let mut plan = Vec::new();
        for (g, w) in weights {
            let mass = ups[i] * w;
            if mass > 0.0 {
                let y = y_of(g);
                cost += mass
                    * (spec.cost.x_cost.cost(&prep.entry_point[i], &s.x) + spec.cost.y_cost(&y, &s.y));
                plan.push(Atom {
                    x: prep.entry_point[i].clone(),
                    y,
                    mass,
                });
            }
        }
        if ups[i] < 1.0 {
            cost += (1.0 - ups[i]) * prep.exit_cost[i];
            plan.push(Atom {
                x: prep.exit_point[i].clone(),
                y: s.y.clone(),
                mass: 1.0 - ups[i],
            });
        }
        plans.push(plan);
    }
    let wc = WorstCaseDistribution {
        plans,
        fiber_mass: ups.clone(),
        transport_cost: cost / n as f64,
        value: raw / total,
    };
    Ok((wc.value, wc))
}

/// Moves every in-fiber sample radially to distance √γ + `margin` from x₀:
/// the distribution that empties the fiber at cost ≈ ρ_max. Returns the
/// moved covariates and the average transport cost.
pub fn fiber_exit_plan(spec: &ProblemSpec, margin: f64) -> Result<(Vec<Vec<f64>>, f64)> {
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let r = spec.fiber.gamma.sqrt() + margin;
    let mut pts = Vec::with_capacity(spec.n_samples());
    let mut cost = 0.0;
    for (i, s) in spec.data.iter().enumerate() {
        if geo.in_fiber(i) {
            let p = radial_point(&s.x, &spec.fiber.x0, r, &spec.cost.x_cost);
            cost += spec.cost.x_cost.cost(&p, &s.x);
            pts.push(p);
        } else {
            pts.push(s.x.clone());
        }
    }
    Ok((pts, cost / spec.n_samples() as f64))
}
