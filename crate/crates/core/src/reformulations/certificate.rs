use serde::{Deserialize, Serialize};

/// Positions of the dual-certificate variables inside a built program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertLayout {
    Singleton {
        lambda1: usize,
        lambda2: usize,
        theta: Vec<usize>,
    },
    Fiber {
        lambda: Vec<usize>,
        s: Vec<usize>,
        nu_plus: usize,
        nu_minus: usize,
        phi: usize,
        varphi: usize,
        psi: Vec<usize>,
        /// S-lemma multipliers, one row per loss piece; empty for ℝᵐ support.
        omega: Vec<Vec<usize>>,
        d: Vec<f64>,
        in_fiber: Vec<bool>,
        rho: f64,
    },
    TypeInfty {
        lambda: usize,
        /// (sample index, variable index) over 𝒥.
        u: Vec<(usize, usize)>,
        j1: Vec<bool>,
    },
}

/// Dual variables certifying a worst-case value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualCertificate {
    Singleton {
        lambda1: f64,
        lambda2: f64,
        theta: Vec<f64>,
    },
    Fiber {
        lambda: Vec<f64>,
        s: Vec<f64>,
        nu_plus: f64,
        nu_minus: f64,
        phi: f64,
        varphi: f64,
        psi: Vec<f64>,
        omega: Vec<Vec<f64>>,
        d: Vec<f64>,
        in_fiber: Vec<bool>,
        rho: f64,
    },
    TypeInfty {
        lambda: f64,
        u: Vec<(usize, f64)>,
        j1: Vec<bool>,
    },
}

impl CertLayout {
    pub fn extract(&self, x: &[f64]) -> DualCertificate {
        let pick = |idx: &[usize]| idx.iter().map(|&i| x[i]).collect::<Vec<f64>>();
        match self {
            CertLayout::Singleton { lambda1, lambda2, theta } => DualCertificate::Singleton {
                lambda1: x[*lambda1],
                lambda2: x[*lambda2],
                theta: pick(theta),
            },
            CertLayout::Fiber {
                lambda,
                s,
                nu_plus,
                nu_minus,
                phi,
                varphi,
                psi,
                omega,
                d,
                in_fiber,
                rho,
            } => DualCertificate::Fiber {
                lambda: pick(lambda),
                s: pick(s),
                nu_plus: x[*nu_plus],
                nu_minus: x[*nu_minus],
                phi: x[*phi],
                varphi: x[*varphi],
                psi: pick(psi),
                omega: omega.iter().map(|o| pick(o)).collect(),
                d: d.clone(),
                in_fiber: in_fiber.clone(),
                rho: *rho,
            },
            CertLayout::TypeInfty { lambda, u, j1 } => DualCertificate::TypeInfty {
                lambda: x[*lambda],
                u: u.iter().map(|&(i, v)| (i, x[v])).collect(),
                j1: j1.clone(),
            },
        }
    }
}

impl DualCertificate {
    /// Largest violation of the certificate's own sign and linking
    /// constraints; for fiber certificates these are the 𝒱 inequalities.
    pub fn violation(&self) -> f64 {
        let neg = |v: f64| (-v).max(0.0);
        match self {
            DualCertificate::Singleton { lambda1, theta, .. } => {
                theta.iter().copied().map(neg).fold(neg(*lambda1), f64::max)
            }
            DualCertificate::Fiber {
                lambda,
                s,
                nu_plus,
                nu_minus,
                phi,
                varphi,
                psi,
                omega,
                d,
                in_fiber,
                rho,
            } => {
                let n = lambda.len();
                let mut v = neg(*nu_plus).max(neg(*nu_minus)).max(neg(*varphi));
                for i in 0..n {
                    v = v.max(neg(lambda[i])).max(neg(psi[i]));
                    let row = if in_fiber[i] {
                        phi - d[i] * varphi + psi[i] - s[i]
                    } else {
                        phi + d[i] * varphi + psi[i] - s[i]
                    };
                    v = v.max(neg(row)).max(neg(varphi - lambda[i]));
                }
                let sum_d: f64 = (0..n).filter(|&i| in_fiber[i]).map(|i| d[i]).sum();
                let agg = nu_plus - nu_minus + (sum_d - n as f64 * rho) * varphi - psi.iter().sum::<f64>();
                v = v.max(neg(agg));
                for o in omega.iter().flatten() {
                    v = v.max(neg(*o));
                }
                v
            }
            DualCertificate::TypeInfty { u, j1, .. } => {
                let mut v = neg(-u.iter().map(|&(_, x)| x).sum::<f64>());
                for &(i, x) in u {
                    if !j1[i] {
                        v = v.max(neg(x));
                    }
                }
                v
            }
        }
    }
}
