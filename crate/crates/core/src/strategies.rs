//! Item-selection policies: random, model-entropy, prediction-entropy, and
//! the Bayesian expected loss evaluated in closed form from Dirichlet moment
//! identities, plus the Monte-Carlo estimator that validates the closed form.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::active::{fast_update, ActiveUserState};
use crate::error::StrategyError;
use crate::math::{self, digamma, sample_dirichlet};
use crate::model::{rating_distribution, rating_likelihood, AspectModel};
use crate::ItemId;

/// The four selection policies under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Random,
    ModelEntropy,
    PredictionEntropy,
    Bayesian,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Random,
        StrategyKind::ModelEntropy,
        StrategyKind::PredictionEntropy,
        StrategyKind::Bayesian,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::ModelEntropy => "model_entropy",
            StrategyKind::PredictionEntropy => "prediction_entropy",
            StrategyKind::Bayesian => "bayesian",
        }
    }
}

impl core::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for StrategyKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "random" => Ok(StrategyKind::Random),
            "model_entropy" => Ok(StrategyKind::ModelEntropy),
            "prediction_entropy" => Ok(StrategyKind::PredictionEntropy),
            "bayesian" => Ok(StrategyKind::Bayesian),
            other => Err(StrategyError::UnknownStrategy(String::from(other))),
        }
    }
}

/// Shannon entropy of a normalized distribution, in nats, with
/// `0 ln 0 = 0`.
pub fn entropy(weights: &[f64]) -> Result<f64, StrategyError> {
    let mut h = 0.0;
    for &w in weights {
        if w < 0.0 {
            return Err(StrategyError::NegativeWeight(w));
        }
        if w > 0.0 {
            h -= w * math::ln(w);
        }
    }
    debug_assert!(
        (weights.iter().sum::<f64>() - 1.0).abs() < 1e-9,
        "entropy expects normalized weights"
    );
    Ok(h.max(0.0))
}

/// Expected entropy of the class simplex after one hypothetical rating of
/// `x`: `sum_r q(r|x, theta*) H(theta_{|x,r})` with `q` normalized over the
/// scale.
pub fn loss_model_entropy(
    model: &AspectModel,
    state: &ActiveUserState,
    x: ItemId,
) -> Result<f64, StrategyError> {
    if x as usize >= model.num_items() {
        return Err(StrategyError::UnknownItem(x));
    }
    let q = rating_distribution(model, &state.theta_star, x, &state.stats);
    let mut loss = 0.0;
    for r in 1..=model.rating_scale() {
        let updated = fast_update(model, state, x, r);
        loss += q.normalized_of(r) * entropy(&updated)?;
    }
    Ok(loss)
}

/// Expected total entropy of the predicted rating distributions over the
/// remaining pool after one hypothetical rating of `x`:
/// `sum_r q(r|x, theta*) sum_{x' != x} H(q(.|x', theta_{|x,r}))`.
pub fn loss_prediction_entropy(
    model: &AspectModel,
    state: &ActiveUserState,
    x: ItemId,
    pool: &[ItemId],
) -> Result<f64, StrategyError> {
    if pool.is_empty() {
        return Err(StrategyError::EmptyPool);
    }
    if x as usize >= model.num_items() {
        return Err(StrategyError::UnknownItem(x));
    }
    let q = rating_distribution(model, &state.theta_star, x, &state.stats);
    let mut loss = 0.0;
    for r in 1..=model.rating_scale() {
        let updated = fast_update(model, state, x, r);
        let mut inner = 0.0;
        for &other in pool {
            if other == x {
                continue;
            }
            let dist = rating_distribution(model, &updated, other, &state.stats);
            inner += entropy(&dist.normalized)?;
        }
        loss += q.normalized_of(r) * inner;
    }
    Ok(loss)
}

/// Bayesian expected loss of querying `x`: the negated double expectation
/// `<< sum_z theta'_z ln(theta_{z|x,r} / theta'_z) >_{p(r|x,theta')} >_{Dirichlet(alpha)}`
/// evaluated in closed form. Rating weights stay raw (the Gaussian mixture
/// over a discrete scale does not sum to 1), and the Dirichlet average uses
/// the moment identities
/// `E[theta_i theta_j] = alpha_i (alpha_j + [i==j]) / (a* (a*+1))` and
/// `E[theta_i theta_j ln theta_j] = E[theta_i theta_j] (psi(alpha_j + 1 + [i==j]) - psi(a*+2))`.
pub fn loss_bayesian(
    model: &AspectModel,
    state: &ActiveUserState,
    x: ItemId,
) -> Result<f64, StrategyError> {
    if x as usize >= model.num_items() {
        return Err(StrategyError::UnknownItem(x));
    }
    let alpha = state.alpha.alpha();
    if let Some(&bad) = alpha.iter().find(|&&a| !(a >= 1.0)) {
        return Err(StrategyError::InvalidAlpha(bad));
    }
    let k = model.k();
    if k == 1 {
        return Ok(0.0);
    }
    let a_star = state.alpha.alpha_star();
    let d = a_star * (a_star + 1.0);
    let psi_total = digamma(a_star + 2.0);
    let psi1: Vec<f64> = alpha.iter().map(|&a| digamma(a + 1.0)).collect();
    let sum_alpha_psi: f64 = alpha.iter().zip(&psi1).map(|(&a, &p)| a * p).sum();

    let mut value = 0.0;
    for r in 1..=model.rating_scale() {
        let dens: Vec<f64> = (0..k)
            .map(|z| rating_likelihood(model, z, x, r, &state.stats).expect("validated"))
            .collect();
        let updated = fast_update(model, state, x, r);
        let log_updated: Vec<f64> = updated.iter().map(|&t| math::ln(t)).collect();

        let sap: f64 = alpha.iter().zip(&dens).map(|(&a, &p)| a * p).sum();
        let salog: f64 = alpha.iter().zip(&log_updated).map(|(&a, &l)| a * l).sum();
        let cross_psi: f64 =
            alpha.iter().zip(&psi1).zip(&dens).map(|((&a, &p), &w)| a * p * w).sum();
        let cross_log: f64 =
            alpha.iter().zip(&log_updated).zip(&dens).map(|((&a, &l), &w)| a * l * w).sum();

        value += psi_total * sap / a_star;
        value -= sum_alpha_psi * sap / d;
        value -= cross_psi / d;
        value += salog * sap / d;
        value += cross_log / d;
        value -= sap / d;
    }
    Ok(-value)
}

/// Monte-Carlo estimate of the Bayesian expected loss: draw
/// `theta' ~ Dirichlet(alpha)` and average the exact inner expression of the
/// double expectation. Returns (mean, standard error).
pub fn mc_expected_loss<R: Rng + ?Sized>(
    model: &AspectModel,
    state: &ActiveUserState,
    x: ItemId,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64), StrategyError> {
    assert!(n_samples >= 100, "mc_expected_loss needs at least 100 samples");
    if x as usize >= model.num_items() {
        return Err(StrategyError::UnknownItem(x));
    }
    let alpha = state.alpha.alpha();
    if let Some(&bad) = alpha.iter().find(|&&a| !(a >= 1.0)) {
        return Err(StrategyError::InvalidAlpha(bad));
    }
    let k = model.k();
    if k == 1 {
        return Ok((0.0, 0.0));
    }
    let scale = model.rating_scale();
    let mut dens = Vec::with_capacity(scale as usize);
    let mut log_updated = Vec::with_capacity(scale as usize);
    for r in 1..=scale {
        dens.push(
            (0..k)
                .map(|z| rating_likelihood(model, z, x, r, &state.stats).expect("validated"))
                .collect::<Vec<f64>>(),
        );
        let updated = fast_update(model, state, x, r);
        log_updated.push(updated.iter().map(|&t| math::ln(t)).collect::<Vec<f64>>());
    }

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let theta = sample_dirichlet(alpha, rng);
        let mut inner = 0.0;
        for (p, lu) in dens.iter().zip(&log_updated) {
            let weight: f64 = p.iter().zip(&theta).map(|(&pi, &ti)| pi * ti).sum();
            let mut gap = 0.0;
            for j in 0..k {
                if theta[j] > 0.0 {
                    gap += theta[j] * (lu[j] - math::ln(theta[j]));
                }
            }
            inner += weight * gap;
        }
        let loss = -inner;
        sum += loss;
        sum_sq += loss * loss;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Ok((mean, math::sqrt(var / n)))
}

/// Losses evaluated during one selection, the chosen item, and how many
/// candidates tied with the minimum.
#[derive(Debug, Clone)]
pub struct LossReport {
    /// (item, loss) in ascending item order; empty for the random policy.
    pub losses: Vec<(ItemId, f64)>,
    pub chosen: ItemId,
    pub tie_count: usize,
}

impl LossReport {
    /// CSV with an `item,loss` header, one row per evaluated candidate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item,loss\n");
        for &(item, loss) in &self.losses {
            out.push_str(&format!("{item},{loss}\n"));
        }
        out
    }
}

/// Pick the next query from `pool`: a uniform draw for the random policy,
/// otherwise the arg-min of the strategy's loss with ties broken by the
/// smallest item id.
pub fn select_item<R: Rng + ?Sized>(
    strategy: StrategyKind,
    model: &AspectModel,
    state: &ActiveUserState,
    pool: &[ItemId],
    rng: &mut R,
) -> Result<(ItemId, LossReport), StrategyError> {
    if pool.is_empty() {
        return Err(StrategyError::EmptyPool);
    }
    if strategy == StrategyKind::Random {
        let chosen = pool[rng.random_range(0..pool.len())];
        return Ok((chosen, LossReport { losses: Vec::new(), chosen, tie_count: 0 }));
    }
    let mut ids: Vec<ItemId> = pool.to_vec();
    ids.sort_unstable();
    let mut losses = Vec::with_capacity(ids.len());
    for &x in &ids {
        let loss = match strategy {
            StrategyKind::ModelEntropy => loss_model_entropy(model, state, x)?,
            StrategyKind::PredictionEntropy => loss_prediction_entropy(model, state, x, &ids)?,
            StrategyKind::Bayesian => loss_bayesian(model, state, x)?,
            StrategyKind::Random => unreachable!(),
        };
        losses.push((x, loss));
    }
    let mut chosen = losses[0].0;
    let mut best = losses[0].1;
    for &(x, l) in &losses[1..] {
        if l < best {
            best = l;
            chosen = x;
        }
    }
    let tie_count = losses.iter().filter(|&&(_, l)| l == best).count();
    Ok((chosen, LossReport { losses, chosen, tie_count }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active::{ActiveUserState, DirichletParams, FoldConfig};
    use crate::dataset::UserNormStats;
    use crate::model::AspectModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn mid_stats() -> UserNormStats {
        UserNormStats { mean: 3.0, std: 1.0 }
    }

    fn two_class_model() -> AspectModel {
        AspectModel::new(
            2,
            3,
            5,
            0.05,
            vec![-1.0, 0.4, 1.1, 1.0, -0.4, -0.9],
            vec![0.5; 6],
            vec![],
        )
        .unwrap()
    }

    /// Densities identical across classes for every item.
    fn uninformative_model(k: usize) -> AspectModel {
        AspectModel::new(k, 3, 5, 0.05, vec![0.2; 3 * k], vec![0.8; 3 * k], vec![]).unwrap()
    }

    fn state_from(alpha: Vec<f64>) -> ActiveUserState {
        ActiveUserState::from_alpha(DirichletParams::new(alpha).unwrap(), mid_stats())
    }

    #[test]
    fn entropy_reference_values() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        let h = entropy(&[0.2; 5]).unwrap();
        assert!((h - libm::log(5.0)).abs() < 1e-12);
        let h = entropy(&[0.5, 0.5]).unwrap();
        assert!((h - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(matches!(entropy(&[-0.1, 1.1]), Err(StrategyError::NegativeWeight(_))));
    }

    #[test]
    fn model_entropy_equals_current_entropy_when_uninformative() {
        let model = uninformative_model(3);
        let state = ActiveUserState::from_revealed(
            &model,
            vec![(0, 2), (1, 4)],
            &FoldConfig::default(),
        )
        .unwrap();
        let h_now = entropy(&state.theta_star).unwrap();
        for x in 0..3 {
            let loss = loss_model_entropy(&model, &state, x).unwrap();
            assert!((loss - h_now).abs() < 1e-6, "item {x}: {loss} vs {h_now}");
        }
    }

    #[test]
    fn model_entropy_near_zero_for_concentrated_alpha() {
        let model = two_class_model();
        let state = state_from(vec![2000.0, 1.000001]);
        for x in 0..3 {
            let loss = loss_model_entropy(&model, &state, x).unwrap();
            assert!(loss < 1e-2, "item {x} loss {loss}");
        }
    }

    #[test]
    fn model_entropy_matches_two_outcome_enumeration() {
        // R=2 instance: enumerate both ratings by hand
        let model =
            AspectModel::new(2, 2, 2, 0.05, vec![-0.8, 0.5, 0.9, -0.6], vec![0.6; 4], vec![])
                .unwrap();
        let state = ActiveUserState::from_revealed(
            &model,
            vec![(0, 1), (1, 2)],
            &FoldConfig::default(),
        )
        .unwrap();
        for x in 0..2 {
            let q = rating_distribution(&model, &state.theta_star, x, &state.stats);
            let expected: f64 = [1u32, 2u32]
                .iter()
                .map(|&r| {
                    let updated = fast_update(&model, &state, x, r);
                    q.normalized_of(r) * entropy(&updated).unwrap()
                })
                .sum();
            let got = loss_model_entropy(&model, &state, x).unwrap();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_entropy_vacuous_and_symmetric() {
        let model = uninformative_model(2);
        let state = ActiveUserState::from_revealed(
            &model,
            vec![(0, 3), (1, 2)],
            &FoldConfig::default(),
        )
        .unwrap();
        // pool of just the candidate itself: nothing left to predict
        assert_eq!(loss_prediction_entropy(&model, &state, 0, &[0]).unwrap(), 0.0);
        assert!(matches!(
            loss_prediction_entropy(&model, &state, 0, &[]),
            Err(StrategyError::EmptyPool)
        ));
        // identical Gaussians everywhere: every candidate looks the same
        let pool = [0, 1, 2];
        let losses: Vec<f64> = pool
            .iter()
            .map(|&x| loss_prediction_entropy(&model, &state, x, &pool).unwrap())
            .collect();
        assert!((losses[0] - losses[1]).abs() < 1e-9);
        assert!((losses[1] - losses[2]).abs() < 1e-9);
    }

    #[test]
    fn bayesian_loss_is_zero_for_single_class() {
        let model = uninformative_model(1);
        let state = state_from(vec![4.0]);
        assert_eq!(loss_bayesian(&model, &state, 0).unwrap(), 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let (mean, se) = mc_expected_loss(&model, &state, 0, 1000, &mut rng).unwrap();
        assert_eq!((mean, se), (0.0, 0.0));
    }

    #[test]
    fn mc_loss_is_deterministic_for_a_fixed_seed() {
        let model = two_class_model();
        let state = state_from(vec![2.5, 1.7]);
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let a = mc_expected_loss(&model, &state, 1, 500, &mut rng).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let b = mc_expected_loss(&model, &state, 1, 500, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_loss_within_mc_error_on_a_hand_instance() {
        let model = two_class_model();
        let state = state_from(vec![3.0, 1.5]);
        let analytic = loss_bayesian(&model, &state, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let (mean, se) = mc_expected_loss(&model, &state, 2, 50_000, &mut rng).unwrap();
        assert!(
            (analytic - mean).abs() <= 3.0 * se,
            "analytic {analytic} vs mc {mean} +- {se}"
        );
    }

    #[test]
    fn select_item_basics() {
        let model = two_class_model();
        let state = state_from(vec![2.0, 2.0]);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        // singleton pool: that item, any strategy
        for kind in StrategyKind::ALL {
            let (item, _) = select_item(kind, &model, &state, &[2], &mut rng).unwrap();
            assert_eq!(item, 2);
        }
        // random choice reproducible under a fixed seed
        let mut r1 = ChaCha12Rng::seed_from_u64(77);
        let mut r2 = ChaCha12Rng::seed_from_u64(77);
        let (a, _) = select_item(StrategyKind::Random, &model, &state, &[0, 1, 2], &mut r1).unwrap();
        let (b, _) = select_item(StrategyKind::Random, &model, &state, &[0, 1, 2], &mut r2).unwrap();
        assert_eq!(a, b);
        // empty pool is an error
        assert!(matches!(
            select_item(StrategyKind::Bayesian, &model, &state, &[], &mut rng),
            Err(StrategyError::EmptyPool)
        ));
    }

    #[test]
    fn select_item_ties_break_to_smallest_id() {
        // all items identical: every loss ties, smallest id wins
        let model = uninformative_model(2);
        let state = ActiveUserState::from_revealed(
            &model,
            vec![(0, 2), (1, 4)],
            &FoldConfig::default(),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let (item, report) =
            select_item(StrategyKind::ModelEntropy, &model, &state, &[2, 0, 1], &mut rng).unwrap();
        assert_eq!(item, 0);
        assert_eq!(report.tie_count, 3);
        assert_eq!(report.losses.len(), 3);
        // report rows are sorted by item id
        assert!(report.losses.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn loss_report_csv_shape() {
        let report = LossReport { losses: vec![(0, 0.5), (3, 0.25)], chosen: 3, tie_count: 1 };
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("item,loss"));
        assert_eq!(lines.next(), Some("0,0.5"));
        assert_eq!(lines.next(), Some("3,0.25"));
    }
}
