use rayon::prelude::*;

use super::{train, IterationStats, RlError, TrainConfig, Variant};
use crate::eqnn::ActorCritic;
use crate::metrics::{evaluate, EvalOptions, MetricsReport};

/// Evaluation protocol applied after each training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepEval {
    pub episodes: usize,
    pub level: f64,
    pub steps: Option<usize>,
}

/// One trained and evaluated `(variant, seed)` cell.
pub struct SweepRun {
    pub variant: Variant,
    pub seed: u64,
    pub history: Vec<IterationStats>,
    pub report: MetricsReport,
    pub agent: ActorCritic,
}

/// Trains every variant on every seed from `base` and evaluates each
/// result with the same commands. Runs fan out over rayon when `parallel`;
/// each run is deterministic either way.
pub fn run_sweep(
    base: &TrainConfig,
    variants: &[Variant],
    seeds: &[u64],
    eval: &SweepEval,
    parallel: bool,
) -> Result<Vec<SweepRun>, RlError> {
    let cells: Vec<(Variant, u64)> = variants
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let run = |&(variant, seed): &(Variant, u64)| -> Result<SweepRun, RlError> {
        let cfg = TrainConfig {
            variant,
            ..base.clone()
        };
        let out = train(&cfg, seed, None, "")?;
        let ev = evaluate(
            &out.agent.deterministic(),
            &out.env,
            &EvalOptions {
                episodes: eval.episodes,
                level: eval.level,
                seed,
                steps: eval.steps,
                history_rows: cfg.history_len + 1,
            },
        )?;
        Ok(SweepRun {
            variant,
            seed,
            history: out.history,
            report: ev.report,
            agent: out.agent,
        })
    };
    if parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}
