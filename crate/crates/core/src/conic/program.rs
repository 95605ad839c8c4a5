use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Handle to a decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

/// aᵀx + c, stored sparsely as (variable index, coefficient) pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        AffineExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: Var, c: f64) -> Self {
        AffineExpr {
            terms: vec![(v.0, c)],
            constant: 0.0,
        }
    }

    pub fn add_term(mut self, v: Var, c: f64) -> Self {
        self.terms.push((v.0, c));
        self
    }

    pub fn add_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// self + scale·other.
    pub fn add_scaled(mut self, other: &AffineExpr, scale: f64) -> Self {
        self.terms.extend(other.terms.iter().map(|&(i, c)| (i, c * scale)));
        self.constant += scale * other.constant;
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
        self
    }

    /// Merges duplicate indices, drops zero coefficients and sorts.
    pub fn canonical(&self) -> AffineExpr {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for &(i, c) in &self.terms {
            *map.entry(i).or_insert(0.0) += c;
        }
        AffineExpr {
            terms: map.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn approx_eq(&self, other: &AffineExpr, tol: f64) -> bool {
        let diff = self.clone().add_scaled(other, -1.0).canonical();
        diff.constant.abs() <= tol && diff.terms.iter().all(|&(_, c)| c.abs() <= tol)
    }
}

impl From<Var> for AffineExpr {
    fn from(v: Var) -> Self {
        AffineExpr::var(v)
    }
}

impl From<f64> for AffineExpr {
    fn from(c: f64) -> Self {
        AffineExpr::constant(c)
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;
    fn add(self, rhs: AffineExpr) -> AffineExpr {
        self.add_scaled(&rhs, 1.0)
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self.add_scaled(&rhs, -1.0)
    }
}

impl Mul<f64> for AffineExpr {
    type Output = AffineExpr;
    fn mul(self, rhs: f64) -> AffineExpr {
        self.scaled(rhs)
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;
    fn neg(self) -> AffineExpr {
        self.scaled(-1.0)
    }
}

/// A block of affine rows that must all equal zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityBlock {
    pub name: String,
    pub rows: Vec<AffineExpr>,
}

/// A cone constraint over affine expressions of the variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeBlock {
    /// Every row is ≥ 0.
    Nonnegative { name: String, rows: Vec<AffineExpr> },
    /// rows[0] ≥ ‖rows[1..]‖₂.
    SecondOrder { name: String, rows: Vec<AffineExpr> },
    /// The `order × order` matrix with row-major `entries` is PSD.
    PositiveSemidefinite {
        name: String,
        order: usize,
        entries: Vec<AffineExpr>,
    },
}

impl ConeBlock {
    pub fn name(&self) -> &str {
        match self {
            ConeBlock::Nonnegative { name, .. }
            | ConeBlock::SecondOrder { name, .. }
            | ConeBlock::PositiveSemidefinite { name, .. } => name,
        }
    }

    /// Every affine expression referenced by the block.
    pub fn exprs(&self) -> &[AffineExpr] {
        match self {
            ConeBlock::Nonnegative { rows, .. } | ConeBlock::SecondOrder { rows, .. } => rows,
            ConeBlock::PositiveSemidefinite { entries, .. } => entries,
        }
    }

    /// Distance of the block's value at `x` outside its cone (0 if inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            ConeBlock::Nonnegative { rows, .. } => rows.iter().map(|r| (-r.eval(x)).max(0.0)).fold(0.0, f64::max),
            ConeBlock::SecondOrder { rows, .. } => {
                let t = rows[0].eval(x);
                let nrm = rows[1..].iter().map(|r| r.eval(x).powi(2)).sum::<f64>().sqrt();
                (nrm - t).max(0.0)
            }
            ConeBlock::PositiveSemidefinite { order, entries, .. } => {
                let n = *order;
                let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                    0.5 * (entries[i * n + j].eval(x) + entries[j * n + i].eval(x))
                });
                let min_eig = m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b));
                (-min_eig).max(0.0)
            }
        }
    }
}

/// Solver-agnostic conic minimization problem
/// min cᵀx + c₀ s.t. equality rows = 0, cone blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub equalities: Vec<EqualityBlock>,
    pub cones: Vec<ConeBlock>,
}

impl ConicProgram {
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Largest equality residual and cone violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .equalities
            .iter()
            .flat_map(|b| &b.rows)
            .map(|r| r.eval(x).abs())
            .fold(0.0, f64::max);
        self.cones.iter().map(|c| c.violation(x)).fold(eq, f64::max)
    }

    pub fn count_rows(&self) -> ProgramShape {
        let mut s = ProgramShape::default();
        s.equality_rows = self.equalities.iter().map(|b| b.rows.len()).sum();
        for c in &self.cones {
            match c {
                ConeBlock::Nonnegative { rows, .. } => s.nonneg_rows += rows.len(),
                ConeBlock::SecondOrder { rows, .. } => s.soc_dims.push(rows.len()),
                ConeBlock::PositiveSemidefinite { order, .. } => s.psd_orders.push(*order),
            }
        }
        s
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    pub fn cone(&self, name: &str) -> Option<&ConeBlock> {
        self.cones.iter().find(|c| c.name() == name)
    }
}

/// Block counts used by shape checks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgramShape {
    pub equality_rows: usize,
    pub nonneg_rows: usize,
    pub soc_dims: Vec<usize>,
    pub psd_orders: Vec<usize>,
}

/// Structural checks. Returns every violation found.
pub fn validate_program(p: &ConicProgram) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    if p.objective.len() != p.num_vars {
        errs.push(format!(
            "objective has {} coefficients for {} variables",
            p.objective.len(),
            p.num_vars
        ));
    }
    if p.var_names.len() != p.num_vars {
        errs.push(format!("{} variable names for {} variables", p.var_names.len(), p.num_vars));
    }
    if p.objective.iter().any(|c| !c.is_finite()) || !p.objective_constant.is_finite() {
        errs.push("objective has a non-finite coefficient".into());
    }
    let check_expr = |ctx: &str, e: &AffineExpr, errs: &mut Vec<String>| {
        if !e.constant.is_finite() {
            errs.push(format!("{ctx}: non-finite constant"));
        }
        for &(i, c) in &e.terms {
            if i >= p.num_vars {
                errs.push(format!("{ctx}: variable index {i} out of range (num_vars = {})", p.num_vars));
            }
            if !c.is_finite() {
                errs.push(format!("{ctx}: non-finite coefficient on variable {i}"));
            }
        }
    };
    for b in &p.equalities {
        for (r, e) in b.rows.iter().enumerate() {
            check_expr(&format!("equality {}[{r}]", b.name), e, &mut errs);
        }
    }
    for c in &p.cones {
        for (r, e) in c.exprs().iter().enumerate() {
            check_expr(&format!("cone {}[{r}]", c.name()), e, &mut errs);
        }
        match c {
            ConeBlock::Nonnegative { name, rows } if rows.is_empty() => {
                errs.push(format!("cone {name}: empty nonnegative block"));
            }
            ConeBlock::SecondOrder { name, rows } if rows.len() < 2 => {
                errs.push(format!("cone {name}: second-order block needs at least 2 rows"));
            }
            ConeBlock::PositiveSemidefinite { name, order, entries } => {
                let n = *order;
                if n == 0 || entries.len() != n * n {
                    errs.push(format!("cone {name}: {} entries for order {n}", entries.len()));
                    continue;
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        if !entries[i * n + j].approx_eq(&entries[j * n + i], 1e-12) {
                            errs.push(format!("cone {name}: entry ({i},{j}) differs from ({j},{i})"));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

/// Incremental construction of a [`ConicProgram`].
#[derive(Debug, Clone)]
pub struct ProgramBuilder {
    names: Vec<String>,
    objective: AffineExpr,
    equalities: Vec<EqualityBlock>,
    cones: Vec<ConeBlock>,
}

impl Default for ProgramBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl ProgramBuilder {
    pub fn new() -> Self {
        ProgramBuilder {
            names: Vec::new(),
            objective: AffineExpr::zero(),
            equalities: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn var(&mut self, name: impl Into<String>) -> Var {
        self.names.push(name.into());
        Var(self.names.len() - 1)
    }

    pub fn vars(&mut self, prefix: &str, n: usize) -> Vec<Var> {
        (0..n).map(|i| self.var(format!("{prefix}[{i}]"))).collect()
    }

    /// A nonnegative variable.
    pub fn nonneg_var(&mut self, name: impl Into<String>) -> Var {
        let name = name.into();
        let v = self.var(name.clone());
        self.nonneg(format!("{name}>=0"), vec![v.into()]);
        v
    }

    pub fn nonneg_vars(&mut self, prefix: &str, n: usize) -> Vec<Var> {
        let vs = self.vars(prefix, n);
        if n > 0 {
            self.nonneg(format!("{prefix}>=0"), vs.iter().map(|&v| v.into()).collect());
        }
        vs
    }

    pub fn minimize(&mut self, obj: AffineExpr) {
        self.objective = obj;
    }

    pub fn eq(&mut self, name: impl Into<String>, rows: Vec<AffineExpr>) {
        if !rows.is_empty() {
            self.equalities.push(EqualityBlock {
                name: name.into(),
                rows,
            });
        }
    }

    pub fn nonneg(&mut self, name: impl Into<String>, rows: Vec<AffineExpr>) {
        if !rows.is_empty() {
            self.cones.push(ConeBlock::Nonnegative {
                name: name.into(),
                rows,
            });
        }
    }

    /// head ≥ ‖tail‖₂.
    pub fn soc(&mut self, name: impl Into<String>, head: AffineExpr, tail: Vec<AffineExpr>) {
        let mut rows = Vec::with_capacity(tail.len() + 1);
        rows.push(head);
        rows.extend(tail);
        self.cones.push(ConeBlock::SecondOrder {
            name: name.into(),
            rows,
        });
    }

    /// Symmetric `matrix` (given in full) is PSD.
    pub fn psd(&mut self, name: impl Into<String>, matrix: Vec<Vec<AffineExpr>>) {
        let order = matrix.len();
        let entries = matrix.into_iter().flatten().collect();
        self.cones.push(ConeBlock::PositiveSemidefinite {
            name: name.into(),
            order,
            entries,
        });
    }

    pub fn build(self) -> ConicProgram {
        let num_vars = self.names.len();
        let mut objective = vec![0.0; num_vars];
        for &(i, c) in &self.objective.terms {
            objective[i] += c;
        }
        ConicProgram {
            num_vars,
            var_names: self.names,
            objective,
            objective_constant: self.objective.constant,
            equalities: self
                .equalities
                .into_iter()
                .map(|b| EqualityBlock {
                    name: b.name,
                    rows: b.rows.iter().map(AffineExpr::canonical).collect(),
                })
                .collect(),
            cones: self
                .cones
                .into_iter()
                .map(|c| match c {
                    ConeBlock::Nonnegative { name, rows } => ConeBlock::Nonnegative {
                        name,
                        rows: rows.iter().map(AffineExpr::canonical).collect(),
                    },
                    ConeBlock::SecondOrder { name, rows } => ConeBlock::SecondOrder {
                        name,
                        rows: rows.iter().map(AffineExpr::canonical).collect(),
                    },
                    ConeBlock::PositiveSemidefinite { name, order, entries } => ConeBlock::PositiveSemidefinite {
                        name,
                        order,
                        entries: entries.iter().map(AffineExpr::canonical).collect(),
                    },
                })
                .collect(),
        }
    }
}

/// Σ coeffs[j]·x[j] for variables given as expressions.
pub fn linear_combination(coeffs: &[f64], xs: &[AffineExpr]) -> AffineExpr {
    coeffs
        .iter()
        .zip(xs)
        .fold(AffineExpr::zero(), |acc, (&c, e)| acc.add_scaled(e, c))
}
