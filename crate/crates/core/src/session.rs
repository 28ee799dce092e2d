//! Simulated elicitation sessions: seed the active user with three ratings,
//! query one item per round, feed back the held true rating, and track MAE
//! over the evaluation holdout.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::active::{ActiveUserState, FoldConfig};
use crate::dataset::TestUserSplit;
use crate::error::SessionError;
use crate::math::{self, splitmix64};
use crate::model::{predict_rating, AspectModel};
use crate::strategies::{select_item, LossReport, StrategyKind};
use crate::{ItemId, UserId};

/// Mean absolute error between predictions and true ratings.
pub fn mae(predictions: &[f64], truths: &[f64]) -> Result<f64, SessionError> {
    if predictions.len() != truths.len() {
        return Err(SessionError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(SessionError::EmptyInput);
    }
    let sum: f64 = predictions.iter().zip(truths).map(|(&p, &t)| (p - t).abs()).sum();
    Ok(sum / predictions.len() as f64)
}

/// Per-session settings.
#[derive(Debug, Clone, Copy)]
pub struct SessionConfig {
    pub rounds: usize,
    pub fold: FoldConfig,
    /// Keep each round's [`LossReport`] in the log.
    pub collect_losses: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { rounds: 5, fold: FoldConfig::default(), collect_losses: false }
    }
}

/// One feedback round: the queried item, the rating the simulated user
/// returned, and the holdout MAE after incorporating it. `query` is `None`
/// when the candidate pool was already exhausted and the previous MAE was
/// carried forward.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub query: Option<(ItemId, u32)>,
    pub mae: f64,
}

/// Full record of one user's session under one strategy.
#[derive(Debug, Clone)]
pub struct SessionLog {
    pub user: UserId,
    pub strategy: StrategyKind,
    /// MAE with only the seed ratings revealed.
    pub round0_mae: f64,
    pub rounds: Vec<RoundRecord>,
    pub pool_exhausted: bool,
    /// One report per actually-queried round when requested.
    pub loss_reports: Vec<LossReport>,
}

impl SessionLog {
    /// `rounds + 1` MAE values, starting at round 0.
    pub fn mae_curve(&self) -> Vec<f64> {
        let mut curve = Vec::with_capacity(self.rounds.len() + 1);
        curve.push(self.round0_mae);
        curve.extend(self.rounds.iter().map(|r| r.mae));
        curve
    }
}

/// Deterministic per-session seed derived from the master seed, the
/// strategy, and the user id, so sessions can run in any order or in
/// parallel without changing results.
pub fn session_seed(master: u64, strategy: StrategyKind, user: UserId) -> u64 {
    let strat = match strategy {
        StrategyKind::Random => 1u64,
        StrategyKind::ModelEntropy => 2,
        StrategyKind::PredictionEntropy => 3,
        StrategyKind::Bayesian => 4,
    };
    splitmix64(splitmix64(master ^ splitmix64(strat)) ^ splitmix64(user as u64))
}

fn holdout_mae(
    model: &AspectModel,
    state: &ActiveUserState,
    holdout: &[(ItemId, u32)],
) -> Result<f64, SessionError> {
    let mut preds = Vec::with_capacity(holdout.len());
    let mut truths = Vec::with_capacity(holdout.len());
    for &(x, r) in holdout {
        preds.push(predict_rating(model, &state.theta_star, x, &state.stats).expect("known item"));
        truths.push(r as f64);
    }
    mae(&preds, &truths)
}

/// Run one simulated session: initialize from the seed ratings, then for
/// each round select an item, reveal the user's true rating, rebuild the
/// active-user state from the enlarged revealed set, and record the holdout
/// MAE. An exhausted pool carries the last MAE forward.
pub fn run_session(
    model: &AspectModel,
    split: &TestUserSplit,
    strategy: StrategyKind,
    cfg: &SessionConfig,
    seed: u64,
) -> Result<SessionLog, SessionError> {
    if split.candidates.is_empty() {
        return Err(SessionError::EmptyCandidatePool(split.user));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut state = ActiveUserState::from_revealed(model, split.seed_items.clone(), &cfg.fold)
        .expect("split items are valid for the model");

    let mut holdout_items: Vec<ItemId> = split.holdout.iter().map(|&(x, _)| x).collect();
    holdout_items.sort_unstable();

    let mut pool = split.candidates.clone();
    let round0_mae = holdout_mae(model, &state, &split.holdout)?;
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut loss_reports = Vec::new();
    let mut pool_exhausted = false;
    let mut last_mae = round0_mae;

    for _ in 0..cfg.rounds {
        if pool.is_empty() {
            pool_exhausted = true;
            rounds.push(RoundRecord { query: None, mae: last_mae });
            continue;
        }
        let ids: Vec<ItemId> = pool.iter().map(|&(x, _)| x).collect();
        let (chosen, report) =
            select_item(strategy, model, &state, &ids, &mut rng).expect("pool is non-empty");

        // Holdout isolation and no re-querying, by construction and checked.
        assert!(
            holdout_items.binary_search(&chosen).is_err(),
            "holdout item {chosen} leaked into a query"
        );
        assert!(
            state.revealed.iter().all(|&(x, _)| x != chosen),
            "item {chosen} queried twice"
        );

        let idx = pool.iter().position(|&(x, _)| x == chosen).expect("chosen from pool");
        let (_, rating) = pool.remove(idx);
        state = state
            .with_feedback(model, chosen, rating, &cfg.fold)
            .expect("feedback items are valid");
        last_mae = holdout_mae(model, &state, &split.holdout)?;
        rounds.push(RoundRecord { query: Some((chosen, rating)), mae: last_mae });
        if cfg.collect_losses {
            loss_reports.push(report);
        }
    }

    Ok(SessionLog {
        user: split.user,
        strategy,
        round0_mae,
        rounds,
        pool_exhausted,
        loss_reports,
    })
}

/// One aggregated cell of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsRow {
    pub strategy: StrategyKind,
    pub round: usize,
    pub mae_mean: f64,
    pub mae_stderr: f64,
    pub n_users: usize,
}

/// Mean and standard error of the per-user MAE for every (strategy, round),
/// sorted by strategy then round.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub rows: Vec<ResultsRow>,
}

impl ResultsTable {
    pub fn from_sessions(sessions: &[SessionLog], rounds: usize) -> ResultsTable {
        let mut rows = Vec::new();
        for strategy in StrategyKind::ALL {
            let curves: Vec<Vec<f64>> = sessions
                .iter()
                .filter(|s| s.strategy == strategy)
                .map(|s| s.mae_curve())
                .collect();
            if curves.is_empty() {
                continue;
            }
            let n = curves.len();
            for round in 0..=rounds {
                let vals: Vec<f64> = curves.iter().map(|c| c[round]).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let stderr = if n > 1 {
                    let var =
                        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
                    math::sqrt(var / n as f64)
                } else {
                    0.0
                };
                rows.push(ResultsRow { strategy, round, mae_mean: mean, mae_stderr: stderr, n_users: n });
            }
        }
        ResultsTable { rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, normalize, split_protocol, SynthConfig};
    use crate::model::{train_em, TrainConfig};

    #[test]
    fn mae_reference_values() {
        assert_eq!(mae(&[3.0, 4.0], &[4.0, 2.0]).unwrap(), 1.5);
        assert_eq!(mae(&[2.0, 5.0], &[2.0, 5.0]).unwrap(), 0.0);
        assert_eq!(mae(&[2.5], &[4.0]).unwrap(), 1.5);
        assert!(matches!(mae(&[], &[]), Err(SessionError::EmptyInput)));
        assert!(matches!(
            mae(&[1.0], &[1.0, 2.0]),
            Err(SessionError::LengthMismatch { predictions: 1, truths: 2 })
        ));
    }

    fn trained_setup() -> (crate::model::AspectModel, crate::dataset::ExperimentSplit) {
        let synth = generate_synthetic(&SynthConfig {
            users: 40,
            items: 40,
            ratings_per_user: 28,
            seed: 100,
            ..SynthConfig::default()
        })
        .unwrap();
        let split = split_protocol(&synth.dataset, 30, 3, 20, 17).unwrap();
        let train = synth.dataset.subset_of_users(&split.train_users).unwrap();
        let norm = normalize(&train);
        let out =
            train_em(&train, &norm, &TrainConfig { k: 3, seed: 2, ..TrainConfig::default() })
                .unwrap();
        (out.model, split)
    }

    #[test]
    fn session_shape_and_bookkeeping() {
        let (model, split) = trained_setup();
        let cfg = SessionConfig::default();
        for strategy in StrategyKind::ALL {
            let tu = &split.test_users[0];
            let log = run_session(&model, tu, strategy, &cfg, 5).unwrap();
            assert_eq!(log.mae_curve().len(), cfg.rounds + 1);
            let queried: Vec<ItemId> =
                log.rounds.iter().filter_map(|r| r.query.map(|(x, _)| x)).collect();
            // distinct and drawn from the candidate pool
            let mut dedup = queried.clone();
            dedup.sort_unstable();
            dedup.dedup();
            assert_eq!(dedup.len(), queried.len());
            for x in &queried {
                assert!(tu.candidates.iter().any(|&(c, _)| c == *x));
            }
            for v in log.mae_curve() {
                assert!(v.is_finite() && v >= 0.0 && v <= 4.0);
            }
        }
    }

    #[test]
    fn session_is_deterministic() {
        let (model, split) = trained_setup();
        let cfg = SessionConfig::default();
        let tu = &split.test_users[1];
        let a = run_session(&model, tu, StrategyKind::Random, &cfg, 42).unwrap();
        let b = run_session(&model, tu, StrategyKind::Random, &cfg, 42).unwrap();
        assert_eq!(a.round0_mae.to_bits(), b.round0_mae.to_bits());
        for (x, y) in a.rounds.iter().zip(&b.rounds) {
            assert_eq!(x.query, y.query);
            assert_eq!(x.mae.to_bits(), y.mae.to_bits());
        }
    }

    #[test]
    fn exhausted_pool_carries_mae_forward() {
        let (model, mut split) = trained_setup();
        let tu = &mut split.test_users[0];
        tu.candidates.truncate(2);
        let log =
            run_session(&model, tu, StrategyKind::Bayesian, &SessionConfig::default(), 3).unwrap();
        assert!(log.pool_exhausted);
        assert_eq!(log.rounds.len(), 5);
        assert!(log.rounds[2].query.is_none());
        assert_eq!(log.rounds[2].mae, log.rounds[1].mae);
        assert_eq!(log.rounds[4].mae, log.rounds[1].mae);

        tu.candidates.clear();
        assert!(matches!(
            run_session(&model, tu, StrategyKind::Random, &SessionConfig::default(), 3),
            Err(SessionError::EmptyCandidatePool(_))
        ));
    }

    #[test]
    fn results_table_aggregates_session_means() {
        let (model, split) = trained_setup();
        let cfg = SessionConfig::default();
        let logs: Vec<SessionLog> = split
            .test_users
            .iter()
            .flat_map(|tu| {
                [StrategyKind::Random, StrategyKind::Bayesian].into_iter().map(|s| {
                    run_session(&model, tu, s, &cfg, session_seed(7, s, tu.user)).unwrap()
                })
            })
            .collect();
        let table = ResultsTable::from_sessions(&logs, cfg.rounds);
        let n = split.test_users.len();
        assert_eq!(table.rows.len(), 2 * (cfg.rounds + 1));
        for row in &table.rows {
            assert_eq!(row.n_users, n);
            // recompute the mean from the logs
            let expected: f64 = logs
                .iter()
                .filter(|l| l.strategy == row.strategy)
                .map(|l| l.mae_curve()[row.round])
                .sum::<f64>()
                / n as f64;
            assert!((row.mae_mean - expected).abs() < 1e-12);
        }
        // sorted by strategy then round
        assert!(table
            .rows
            .windows(2)
            .all(|w| (w[0].strategy, w[0].round) < (w[1].strategy, w[1].round)));
    }
}
