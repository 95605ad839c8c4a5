//! Rolling-window harness: tune on a validation period, evaluate on the
//! following test period, repeat over random asset pools.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{aggregate_metrics, annualized_sharpe, Metrics, ReturnSeries};
use super::models::{allocate, ModelId, ModelParams};
use super::wilcoxon::wilcoxon_signed_rank;
use crate::conic::SolveOptions;
use crate::data_io::format_f64;
use crate::error::{Error, Result};
use crate::loss::dot;
use crate::types::{FeasibleSet, LossVariant, SampleSet, DEFAULT_TAU};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperGrids {
    pub eta: Vec<f64>,
    pub tau: f64,
    /// DRMV / DRMC radius.
    pub rho: Vec<f64>,
    pub gamma_quantiles: Vec<f64>,
    pub rho_quantiles: Vec<f64>,
    pub eps: Vec<f64>,
    pub rho_scales: Vec<f64>,
}

impl Default for HyperGrids {
    fn default() -> Self {
        // η: 7 log-spaced points on [0.1, 20].
        let (lo, hi) = (0.1_f64.ln(), 20.0_f64.ln());
        HyperGrids {
            eta: (0..7).map(|k| (lo + (hi - lo) * k as f64 / 6.0).exp()).collect(),
            tau: DEFAULT_TAU,
            rho: vec![0.1, 0.2, 0.5],
            gamma_quantiles: vec![0.1, 0.2, 0.5],
            rho_quantiles: vec![0.05, 0.1, 0.25],
            eps: vec![0.1, 0.2, 0.5],
            rho_scales: vec![1.1, 1.2, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    /// Training observations preceding each date.
    pub window: usize,
    pub validation: usize,
    pub test: usize,
    pub replications: usize,
    /// Assets sampled per replication.
    pub pool_size: usize,
    pub seed: u64,
    pub grids: HyperGrids,
    pub tol: f64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            window: 504,
            validation: 504,
            test: 504,
            replications: 8,
            pool_size: 20,
            seed: 0,
            grids: HyperGrids::default(),
            tol: 1e-8,
            jobs: 0,
        }
    }
}

/// A per-date model failure; the date is skipped for that model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub model: ModelId,
    pub phase: String,
    pub date: usize,
    pub params: ModelParams,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelId,
    pub validation: Metrics,
    pub test: Metrics,
    /// Test-period annualized Sharpe per replication (NaN when undefined).
    pub test_sharpe: Vec<f64>,
    pub validation_sharpe: Vec<f64>,
    pub selected: Vec<ModelParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: LossVariant,
    pub rows: Vec<ModelReport>,
    /// One-sided Wilcoxon p-values of the optimal-transport model against
    /// each baseline; `None` when undefined.
    pub p_values: Vec<(ModelId, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: BacktestConfig,
    pub pools: Vec<Vec<usize>>,
    pub families: Vec<FamilyReport>,
    pub failures: Vec<Failure>,
}

pub const METRIC_COLUMNS: [&str; 6] = ["model", "mean", "stdDev", "sharpe", "maxDraw", "tradeVol"];

fn family_of(model: ModelId) -> Option<LossVariant> {
    model.variant()
}

fn base_model(f: LossVariant) -> ModelId {
    match f {
        LossVariant::MeanVariance => ModelId::Mv,
        LossVariant::MeanCvar => ModelId::Mc,
    }
}

fn ot_model(f: LossVariant) -> ModelId {
    match f {
        LossVariant::MeanVariance => ModelId::Otcmv,
        LossVariant::MeanCvar => ModelId::Otcmc,
    }
}

/// The five comparison models of the significance table.
pub fn baselines(f: LossVariant) -> [ModelId; 5] {
    match f {
        LossVariant::MeanVariance => [ModelId::Ew, ModelId::Mv, ModelId::Drmv, ModelId::Cmv, ModelId::Drcmv],
        LossVariant::MeanCvar => [ModelId::Ew, ModelId::Mc, ModelId::Drmc, ModelId::Cmc, ModelId::Drcmc],
    }
}

/// Hyperparameter grid of `model` with η fixed, in lexicographic order.
pub fn hyper_candidates(model: ModelId, eta: f64, grids: &HyperGrids) -> Vec<ModelParams> {
    let base = ModelParams {
        eta,
        tau: grids.tau,
        ..ModelParams::default()
    };
    let mut out: Vec<ModelParams> = match model {
        ModelId::Ew | ModelId::Mv | ModelId::Mc => vec![base],
        ModelId::Drmv | ModelId::Drmc => grids.rho.iter().map(|&r| ModelParams { rho: Some(r), ..base }).collect(),
        ModelId::Cmv | ModelId::Cmc => grids
            .gamma_quantiles
            .iter()
            .map(|&a| ModelParams {
                gamma_quantile: Some(a),
                ..base
            })
            .collect(),
        ModelId::Drcmv | ModelId::Drcmc => grids
            .gamma_quantiles
            .iter()
            .flat_map(|&a| {
                grids.rho_quantiles.iter().map(move |&b| ModelParams {
                    gamma_quantile: Some(a),
                    rho_quantile: Some(b),
                    ..base
                })
            })
            .collect(),
        ModelId::Otcmv | ModelId::Otcmc => grids
            .eps
            .iter()
            .flat_map(|&e| {
                grids.rho_scales.iter().map(move |&s| ModelParams {
                    eps: Some(e),
                    rho_scale: Some(s),
                    ..base
                })
            })
            .collect(),
    };
    out.sort_by(|a, b| a.key().partial_cmp(&b.key()).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Highest score wins; among equal scores the lexicographically smallest
/// grid point. NaN scores never win.
pub fn tune_hyperparams(candidates: &[ModelParams], scores: &[f64]) -> Result<(ModelParams, f64)> {
    if candidates.is_empty() || candidates.len() != scores.len() {
        return Err(Error::InvalidParameter("need one score per nonempty candidate".into()));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| {
        candidates[i]
            .key()
            .partial_cmp(&candidates[j].key())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut best: Option<usize> = None;
    for i in order {
        if scores[i].is_nan() {
            continue;
        }
        if best.map_or(true, |b| scores[i] > scores[b]) {
            best = Some(i);
        }
    }
    best.map(|b| (candidates[b], scores[b]))
        .ok_or_else(|| Error::Numeric("every validation score is NaN".into()))
}

struct Period<'a> {
    data: &'a SampleSet,
    feasible: &'a FeasibleSet,
    window: usize,
    opts: SolveOptions,
    replication: usize,
}

impl Period<'_> {
    fn run(&self, model: ModelId, params: &ModelParams, dates: std::ops::Range<usize>, phase: &str) -> (ReturnSeries, Vec<Failure>) {
        let mut series = ReturnSeries::empty();
        let mut failures = Vec::new();
        for t in dates {
            let outcome = self
                .data
                .window(t - self.window..t)
                .and_then(|w| allocate(model, &w, self.data.x(t), params, self.feasible, &self.opts));
            match outcome {
                Ok(a) => {
                    let r = dot(&a.alpha, self.data.y(t));
                    series.push(t, r, a.alpha);
                }
                Err(e) => {
                    log::warn!("replication {} {model} date {t}: {e}", self.replication);
                    failures.push(Failure {
                        replication: self.replication,
                        model,
                        phase: phase.into(),
                        date: t,
                        params: *params,
                        code: e.code().into(),
                        message: e.to_string(),
                    });
                }
            }
        }
        (series, failures)
    }
}

fn score(s: &ReturnSeries) -> f64 {
    annualized_sharpe(&s.returns).unwrap_or(f64::NAN)
}

struct Selected {
    params: ModelParams,
    validation: ReturnSeries,
    test: ReturnSeries,
}

struct Replication {
    pool: Vec<usize>,
    models: Vec<(ModelId, Selected)>,
    failures: Vec<Failure>,
}

fn run_replication(models: &[ModelId], data: &SampleSet, cfg: &BacktestConfig, r: usize) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64));
    let mut pool = rand::seq::index::sample(&mut rng, data.m(), cfg.pool_size).into_vec();
    pool.sort_unstable();
    let sub = data.select_assets(&pool)?;
    let feasible = FeasibleSet::simplex(cfg.pool_size);
    let period = Period {
        data: &sub,
        feasible: &feasible,
        window: cfg.window,
        opts: SolveOptions::with_tol(cfg.tol),
        replication: r,
    };
    let val = cfg.window..cfg.window + cfg.validation;
    let test = val.end..val.end + cfg.test;
    let mut failures = Vec::new();
    let mut out = Vec::new();

    let families: Vec<LossVariant> = [LossVariant::MeanVariance, LossVariant::MeanCvar]
        .into_iter()
        .filter(|f| models.iter().any(|m| family_of(*m) == Some(*f)))
        .collect();
    let mut etas = Vec::new();
    for f in &families {
        // η is tuned once on the unconditional model and shared.
        let base = base_model(*f);
        let cands: Vec<ModelParams> = cfg
            .grids
            .eta
            .iter()
            .flat_map(|&e| hyper_candidates(base, e, &cfg.grids))
            .collect();
        let runs: Vec<(ReturnSeries, Vec<Failure>)> =
            cands.par_iter().map(|p| period.run(base, p, val.clone(), "tuning")).collect();
        let scores: Vec<f64> = runs.iter().map(|(s, _)| score(s)).collect();
        let (best, _) = tune_hyperparams(&cands, &scores)
            .map_err(|e| Error::Numeric(format!("replication {r}, {base}: {e}")))?;
        etas.push((*f, best.eta));
        failures.extend(runs.into_iter().flat_map(|(_, f)| f));
    }

    for &model in models {
        let eta = match family_of(model) {
            Some(f) => etas.iter().find(|(g, _)| *g == f).map(|(_, e)| *e).expect("family tuned"),
            None => 0.0,
        };
        let cands = hyper_candidates(model, eta, &cfg.grids);
        let runs: Vec<(ReturnSeries, Vec<Failure>)> =
            cands.par_iter().map(|p| period.run(model, p, val.clone(), "validation")).collect();
        let scores: Vec<f64> = runs.iter().map(|(s, _)| score(s)).collect();
        let (best, _) = tune_hyperparams(&cands, &scores)
            .map_err(|e| Error::Numeric(format!("replication {r}, {model}: {e}")))?;
        let k = cands.iter().position(|c| *c == best).expect("winner is a candidate");
        let mut validation = ReturnSeries::empty();
        for (i, (s, f)) in runs.into_iter().enumerate() {
            failures.extend(f);
            if i == k {
                validation = s;
            }
        }
        let (test_series, f) = period.run(model, &best, test.clone(), "test");
        failures.extend(f);
        out.push((
            model,
            Selected {
                params: best,
                validation,
                test: test_series,
            },
        ));
    }
    Ok(Replication {
        pool,
        models: out,
        failures,
    })
}

/// Runs every model over `cfg.replications` random asset pools.
pub fn run_backtest(models: &[ModelId], data: &SampleSet, cfg: &BacktestConfig) -> Result<BacktestReport> {
    let mut models = models.to_vec();
    models.sort();
    models.dedup();
    if models.is_empty() {
        return Err(Error::InvalidParameter("no models requested".into()));
    }
    if cfg.window == 0 || cfg.validation < 2 || cfg.test < 2 || cfg.replications == 0 {
        return Err(Error::InvalidParameter(
            "window must be >= 1, validation and test >= 2, replications >= 1".into(),
        ));
    }
    let need = cfg.window + cfg.validation + cfg.test;
    if data.len() < need {
        return Err(Error::InvalidParameter(format!(
            "dataset has {} periods, window + validation + test needs {need}",
            data.len()
        )));
    }
    if cfg.pool_size == 0 || cfg.pool_size > data.m() {
        return Err(Error::InvalidParameter(format!(
            "pool size {} must lie in 1..={}",
            cfg.pool_size,
            data.m()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let reps: Vec<Replication> = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(&models, data, cfg, r))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut families = Vec::new();
    for f in [LossVariant::MeanVariance, LossVariant::MeanCvar] {
        let members: Vec<ModelId> = models
            .iter()
            .copied()
            .filter(|m| family_of(*m) == Some(f) || (*m == ModelId::Ew && models.iter().any(|n| family_of(*n) == Some(f))))
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut rows = Vec::new();
        for &model in &members {
            let picks: Vec<&Selected> = reps
                .iter()
                .map(|rep| &rep.models.iter().find(|(m, _)| *m == model).expect("model ran").1)
                .collect();
            let vals: Vec<ReturnSeries> = picks.iter().map(|s| s.validation.clone()).collect();
            let tests: Vec<ReturnSeries> = picks.iter().map(|s| s.test.clone()).collect();
            rows.push(ModelReport {
                model,
                validation: aggregate_metrics(&vals)?,
                test: aggregate_metrics(&tests)?,
                test_sharpe: tests.iter().map(score).collect(),
                validation_sharpe: vals.iter().map(score).collect(),
                selected: picks.iter().map(|s| s.params).collect(),
            });
        }
        let ot = ot_model(f);
        let p_values = match rows.iter().find(|r| r.model == ot) {
            None => Vec::new(),
            Some(otr) => baselines(f)
                .iter()
                .filter_map(|b| rows.iter().find(|r| r.model == *b))
                .map(|b| {
                    let p = wilcoxon_signed_rank(&otr.test_sharpe, &b.test_sharpe);
                    if let Err(e) = &p {
                        log::warn!("{ot} vs {}: {e}", b.model);
                    }
                    (b.model, p.ok())
                })
                .collect(),
        };
        families.push(FamilyReport { family: f, rows, p_values });
    }

    let mut failures: Vec<Failure> = reps.iter().flat_map(|r| r.failures.iter().cloned()).collect();
    failures.sort_by(|a, b| {
        (a.replication, a.model, a.date)
            .cmp(&(b.replication, b.model, b.date))
            .then(a.params.key().partial_cmp(&b.params.key()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(BacktestReport {
        config: cfg.clone(),
        pools: reps.into_iter().map(|r| r.pool).collect(),
        families,
        failures,
    })
}

fn family_prefix(f: LossVariant) -> &'static str {
    match f {
        LossVariant::MeanVariance => "mv",
        LossVariant::MeanCvar => "cvar",
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format_f64(v)
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn metric_row(model: ModelId, m: &Metrics) -> Vec<String> {
    vec![model.name().into(), num(m.mean), num(m.std_dev), num(m.sharpe), num(m.max_draw), num(m.trade_vol)]
}

/// Writes the summary tables, p-values, per-replication Sharpe arrays and
/// the full JSON report into `dir`; returns the paths written.
pub fn write_report(report: &BacktestReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let header: Vec<String> = METRIC_COLUMNS.iter().map(|s| s.to_string()).collect();
    for fam in &report.families {
        let pre = family_prefix(fam.family);
        for (suffix, pick) in [("validation", true), ("test", false)] {
            let p = dir.join(format!("{pre}_{suffix}.csv"));
            let rows: Vec<Vec<String>> = fam
                .rows
                .iter()
                .map(|r| metric_row(r.model, if pick { &r.validation } else { &r.test }))
                .collect();
            write_csv(&p, &header, &rows)?;
            paths.push(p);
        }
        if !fam.p_values.is_empty() {
            let p = dir.join(format!("{pre}_pvalues.csv"));
            let mut head = vec!["Model".to_string()];
            head.extend(fam.p_values.iter().map(|(m, _)| m.name().to_string()));
            let mut row = vec!["p-value".to_string()];
            row.extend(fam.p_values.iter().map(|(_, v)| v.map_or("NaN".into(), num)));
            write_csv(&p, &head, &[row])?;
            paths.push(p);
        }
        let p = dir.join(format!("{pre}_sharpe_by_replication.csv"));
        let mut head = vec!["replication".to_string()];
        head.extend(fam.rows.iter().map(|r| r.model.name().to_string()));
        let reps = fam.rows.first().map_or(0, |r| r.test_sharpe.len());
        let rows: Vec<Vec<String>> = (0..reps)
            .map(|i| {
                let mut row = vec![i.to_string()];
                row.extend(fam.rows.iter().map(|r| num(r.test_sharpe[i])));
                row
            })
            .collect();
        write_csv(&p, &head, &rows)?;
        paths.push(p);
    }
    let p = dir.join("report.json");
    crate::data_io::write_json(&p, report)?;
    paths.push(p);
    Ok(paths)
}
