//! The simulated-elicitation experiment: resolve the dataset, train the
//! model on the training users, run every (strategy, test user) session,
//! and aggregate per-round MAE. Sessions run in parallel; outputs are a
//! pure function of (dataset bytes, config, master seed).

use std::path::{Path, PathBuf};

use anyhow::Context;
use elicit_core::dataset::{generate_synthetic, normalize, split_protocol, Dataset};
use elicit_core::math::splitmix64;
use elicit_core::model::{train_em, AspectModel, TrainConfig};
use elicit_core::session::{run_session, session_seed, ResultsTable, SessionConfig, SessionLog};
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig};
use crate::loader::load_dataset;

pub struct ExperimentOutput {
    pub model: AspectModel,
    pub sessions: Vec<SessionLog>,
    pub results: ResultsTable,
    pub rounds: usize,
}

/// Resolve the configured data source.
pub fn resolve_dataset(cfg: &ExperimentConfig) -> anyhow::Result<Dataset> {
    match &cfg.source {
        DataSource::Synthetic => {
            let mut synth = cfg.synth;
            synth.rating_scale = cfg.rating_scale;
            synth.seed = splitmix64(cfg.seed ^ 0x5EED_DA7A);
            Ok(generate_synthetic(&synth)?.dataset)
        }
        DataSource::File { path } => {
            load_dataset(path, &cfg.format, cfg.rating_scale).context("loading dataset")
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentOutput> {
    let dataset = resolve_dataset(cfg)?;
    let split = split_protocol(&dataset, cfg.train_users, cfg.seed_count, cfg.holdout_count, cfg.seed)?;
    log::info!(
        "dataset: {} users / {} items / {} ratings; {} test users eligible",
        dataset.num_users(),
        dataset.num_items(),
        dataset.len(),
        split.test_users.len()
    );

    let train = dataset.subset_of_users(&split.train_users)?;
    let norm = normalize(&train);
    let train_cfg = TrainConfig {
        k: cfg.k,
        max_iter: cfg.em_max_iter,
        loglik_tol: cfg.em_tol,
        sigma_floor: cfg.sigma_floor,
        seed: splitmix64(cfg.seed ^ 0x7EA1_EA51),
    };
    let outcome = train_em(&train, &norm, &train_cfg)?;
    log::info!(
        "trained K={} in {} iterations (final log-likelihood {:.3})",
        cfg.k,
        outcome.loglik.len(),
        outcome.loglik.last().copied().unwrap_or(f64::NAN)
    );
    let model = outcome.model;

    let session_cfg = SessionConfig {
        rounds: cfg.rounds,
        collect_losses: cfg.dump_losses,
        ..SessionConfig::default()
    };
    let jobs: Vec<(elicit_core::StrategyKind, &elicit_core::dataset::TestUserSplit)> = cfg
        .strategies
        .iter()
        .flat_map(|&s| split.test_users.iter().map(move |tu| (s, tu)))
        .collect();
    let sessions: Vec<SessionLog> = jobs
        .par_iter()
        .map(|&(strategy, tu)| {
            run_session(&model, tu, strategy, &session_cfg, session_seed(cfg.seed, strategy, tu.user))
                .expect("eligible test users have non-empty candidate pools")
        })
        .collect();

    let results = ResultsTable::from_sessions(&sessions, cfg.rounds);
    Ok(ExperimentOutput { model, sessions, results, rounds: cfg.rounds })
}

/// `strategy,round,mae_mean,mae_stderr,n_users` with 4-decimal MAE columns.
pub fn results_csv(results: &ResultsTable) -> String {
    let mut out = String::from("strategy,round,mae_mean,mae_stderr,n_users\n");
    for row in &results.rows {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{}\n",
            row.strategy, row.round, row.mae_mean, row.mae_stderr, row.n_users
        ));
    }
    out
}

/// Per-session log: `strategy,user,round,item,rating,mae`. Round 0 rows
/// carry empty item/rating columns; carried-forward rounds repeat the MAE
/// with empty item/rating.
pub fn sessions_csv(sessions: &[SessionLog]) -> String {
    let mut out = String::from("strategy,user,round,item,rating,mae\n");
    for s in sessions {
        out.push_str(&format!("{},{},0,,,{:.4}\n", s.strategy, s.user, s.round0_mae));
        for (idx, round) in s.rounds.iter().enumerate() {
            match round.query {
                Some((item, rating)) => out.push_str(&format!(
                    "{},{},{},{},{},{:.4}\n",
                    s.strategy,
                    s.user,
                    idx + 1,
                    item,
                    rating,
                    round.mae
                )),
                None => out.push_str(&format!(
                    "{},{},{},,,{:.4}\n",
                    s.strategy,
                    s.user,
                    idx + 1,
                    round.mae
                )),
            }
        }
    }
    out
}

/// Every evaluated candidate loss: `strategy,user,round,item,loss`. Only
/// sessions run with loss collection contribute rows.
pub fn losses_csv(sessions: &[SessionLog]) -> String {
    let mut out = String::from("strategy,user,round,item,loss\n");
    for s in sessions {
        for (idx, report) in s.loss_reports.iter().enumerate() {
            for &(item, loss) in &report.losses {
                out.push_str(&format!(
                    "{},{},{},{},{:.6}\n",
                    s.strategy,
                    s.user,
                    idx + 1,
                    item,
                    loss
                ));
            }
        }
    }
    out
}

/// Write results.csv, sessions.csv, and (when losses were collected)
/// losses.csv under `out_dir`. Returns the paths written.
pub fn write_outputs(out_dir: &Path, output: &ExperimentOutput) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut written = Vec::new();

    let results_path = out_dir.join("results.csv");
    std::fs::write(&results_path, results_csv(&output.results))?;
    written.push(results_path);

    let sessions_path = out_dir.join("sessions.csv");
    std::fs::write(&sessions_path, sessions_csv(&output.sessions))?;
    written.push(sessions_path);

    if output.sessions.iter().any(|s| !s.loss_reports.is_empty()) {
        let losses_path = out_dir.join("losses.csv");
        std::fs::write(&losses_path, losses_csv(&output.sessions))?;
        written.push(losses_path);
    }
    Ok(written)
}
