//! Rolling-window backtests of the model zoo on return data.

mod harness;
mod metrics;
mod models;
mod wilcoxon;

pub use harness::{
    baselines, hyper_candidates, run_backtest, tune_hyperparams, write_report, BacktestConfig, BacktestReport,
    Failure, FamilyReport, HyperGrids, ModelReport, METRIC_COLUMNS,
};
pub use metrics::{
    aggregate_metrics, annualized_sharpe, compute_metrics, max_drawdown, mean_std, trade_volume, wealth_curve,
    Metrics, ReturnSeries, TRADING_DAYS,
};
pub use models::{
    allocate, distance_quantile, drmv_allocation, equal_weight, saa_allocation, ModelId, ModelParams,
};
pub use wilcoxon::{wilcoxon_exact, wilcoxon_normal, wilcoxon_signed_rank, EXACT_MAX};
