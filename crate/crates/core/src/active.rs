//! Active-user machinery: maximum-likelihood fold-in of the class simplex,
//! the Dirichlet approximation of its posterior, and the fast one-example
//! update used inside candidate scans.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::UserNormStats;
use crate::error::ModelError;
use crate::math::{floor_and_normalize, gaussian_pdf};
use crate::model::AspectModel;
use crate::ItemId;

/// Fixed-point iteration settings for [`fold_in`].
#[derive(Debug, Clone, Copy)]
pub struct FoldConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FoldConfig {
    fn default() -> Self {
        FoldConfig { tol: 1e-10, max_iter: 2000 }
    }
}

/// The fast update stops when no coordinate moves more than this.
const FAST_UPDATE_TOL: f64 = 1e-8;
/// Iteration cap keeps the per-candidate scan bounded.
const FAST_UPDATE_MAX_ITER: usize = 500;

/// Dirichlet hyperparameters approximating the posterior over the active
/// user's class simplex. Every entry is at least 1; the all-ones vector is
/// the uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self, ModelError> {
        if alpha.is_empty() {
            return Err(ModelError::InvalidParameters("alpha must be non-empty"));
        }
        if alpha.iter().any(|&a| !(a >= 1.0) || !a.is_finite()) {
            return Err(ModelError::InvalidParameters("alpha entries must be >= 1"));
        }
        Ok(DirichletParams { alpha })
    }

    /// The uniform prior over the K-simplex.
    pub fn uniform(k: usize) -> Self {
        DirichletParams { alpha: vec![1.0; k] }
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Dirichlet mode `(alpha_z - 1) / (alpha_star - K)`, or `None` for the
    /// uniform prior where the mode is not unique.
    pub fn mode(&self) -> Option<Vec<f64>> {
        let k = self.k() as f64;
        let denom = self.alpha_star() - k;
        if denom <= 0.0 {
            return None;
        }
        Some(self.alpha.iter().map(|&a| (a - 1.0) / denom).collect())
    }
}

/// Everything known about the active user: revealed ratings, the MLE
/// simplex, its Dirichlet posterior approximation, and normalization stats
/// computed from the revealed ratings only.
#[derive(Debug, Clone)]
pub struct ActiveUserState {
    pub revealed: Vec<(ItemId, u32)>,
    pub theta_star: Vec<f64>,
    pub alpha: DirichletParams,
    pub stats: UserNormStats,
}

impl ActiveUserState {
    /// Build the state from scratch: stats over the revealed ratings, then
    /// fold-in, then the Dirichlet posterior.
    pub fn from_revealed(
        model: &AspectModel,
        revealed: Vec<(ItemId, u32)>,
        fold: &FoldConfig,
    ) -> Result<Self, ModelError> {
        for &(x, r) in &revealed {
            if x as usize >= model.num_items() {
                return Err(ModelError::UnknownItem(x));
            }
            if r < 1 || r > model.rating_scale() {
                return Err(ModelError::InvalidParameters("rating outside scale"));
            }
        }
        let stats = revealed_stats(model, &revealed);
        let theta_star = fold_in_with_stats(model, &revealed, &stats, fold.tol, fold.max_iter);
        let alpha = posterior_with_stats(model, &revealed, &stats, &theta_star);
        Ok(ActiveUserState { revealed, theta_star, alpha, stats })
    }

    /// Accept one feedback rating and rebuild stats, theta, and alpha from
    /// the full enlarged revealed set.
    pub fn with_feedback(
        &self,
        model: &AspectModel,
        x: ItemId,
        r: u32,
        fold: &FoldConfig,
    ) -> Result<Self, ModelError> {
        let mut revealed = self.revealed.clone();
        revealed.push((x, r));
        ActiveUserState::from_revealed(model, revealed, fold)
    }

    /// A state with a given posterior but no revealed history; used by the
    /// verification harness to evaluate losses on arbitrary hyperparameters.
    pub fn from_alpha(alpha: DirichletParams, stats: UserNormStats) -> Self {
        let theta_star =
            alpha.mode().unwrap_or_else(|| vec![1.0 / alpha.k() as f64; alpha.k()]);
        ActiveUserState { revealed: Vec::new(), theta_star, alpha, stats }
    }
}

/// Normalization stats over the revealed ratings; with nothing revealed the
/// scale midpoint with unit spread is the neutral default.
fn revealed_stats(model: &AspectModel, revealed: &[(ItemId, u32)]) -> UserNormStats {
    if revealed.is_empty() {
        return UserNormStats { mean: (1.0 + model.rating_scale() as f64) / 2.0, std: 1.0 };
    }
    let raw: Vec<u32> = revealed.iter().map(|&(_, r)| r).collect();
    UserNormStats::from_ratings(&raw)
}

/// Class-conditional density of each revealed rating, row-major `n x k`.
fn likelihood_table(
    model: &AspectModel,
    revealed: &[(ItemId, u32)],
    stats: &UserNormStats,
) -> Vec<f64> {
    let k = model.k();
    let mut table = Vec::with_capacity(revealed.len() * k);
    for &(x, r) in revealed {
        let v = stats.normalize(r as f64);
        for z in 0..k {
            table.push(gaussian_pdf(v, model.mu(z, x), model.sigma(z, x)));
        }
    }
    table
}

/// Maximum-likelihood estimate of the active user's class simplex given the
/// trained class-conditional densities, via the EM fixed point
/// `theta_z <- mean_i resp_i(z)`. Stats are computed from the revealed set.
///
/// With no revealed ratings the estimate is uniform.
pub fn fold_in(
    model: &AspectModel,
    revealed: &[(ItemId, u32)],
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let stats = revealed_stats(model, revealed);
    fold_in_with_stats(model, revealed, &stats, tol, max_iter)
}

pub(crate) fn fold_in_with_stats(
    model: &AspectModel,
    revealed: &[(ItemId, u32)],
    stats: &UserNormStats,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let k = model.k();
    if k == 1 {
        return vec![1.0];
    }
    let mut theta = vec![1.0 / k as f64; k];
    if revealed.is_empty() {
        return theta;
    }
    let table = likelihood_table(model, revealed, stats);
    let n = revealed.len() as f64;
    let mut next = vec![0.0; k];
    for iter in 0..max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        for row in table.chunks(k) {
            let mix: f64 = row.iter().zip(&theta).map(|(&p, &t)| p * t).sum();
            for z in 0..k {
                next[z] += row[z] * theta[z] / mix;
            }
        }
        next.iter_mut().for_each(|v| *v /= n);
        floor_and_normalize(&mut next);
        let delta = theta
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        theta.copy_from_slice(&next);
        if delta < tol {
            return theta;
        }
        if iter == max_iter - 1 {
            log::warn!("fold_in hit the {max_iter}-iteration cap (last delta {delta:.3e})");
        }
    }
    theta
}

/// Dirichlet hyperparameters of the posterior approximation around
/// `theta_star`: `alpha_z = sum_i resp_i(z) + 1`.
pub fn dirichlet_posterior(
    model: &AspectModel,
    revealed: &[(ItemId, u32)],
    theta_star: &[f64],
) -> DirichletParams {
    let stats = revealed_stats(model, revealed);
    posterior_with_stats(model, revealed, &stats, theta_star)
}

pub(crate) fn posterior_with_stats(
    model: &AspectModel,
    revealed: &[(ItemId, u32)],
    stats: &UserNormStats,
    theta_star: &[f64],
) -> DirichletParams {
    let k = model.k();
    debug_assert_eq!(theta_star.len(), k);
    let mut alpha = vec![1.0; k];
    let table = likelihood_table(model, revealed, stats);
    for row in table.chunks(k) {
        let mix: f64 = row.iter().zip(theta_star).map(|(&p, &t)| p * t).sum();
        for z in 0..k {
            alpha[z] += row[z] * theta_star[z] / mix;
        }
    }
    DirichletParams { alpha }
}

/// Approximate fold-in over `revealed + {(x, r)}` without rescanning the
/// revealed history: fixed-point iteration of the one-example MAP update
/// `theta_z <- (resp_z + alpha_z - 1) / normalizer`, started from the
/// Dirichlet mode. Reads only `(alpha, stats)` from the state.
pub fn fast_update(model: &AspectModel, state: &ActiveUserState, x: ItemId, r: u32) -> Vec<f64> {
    let k = model.k();
    if k == 1 {
        return vec![1.0];
    }
    debug_assert!((x as usize) < model.num_items());
    let v = state.stats.normalize(r as f64);
    let dens: Vec<f64> =
        (0..k).map(|z| gaussian_pdf(v, model.mu(z, x), model.sigma(z, x))).collect();
    let alpha = state.alpha.alpha();
    let mut theta =
        state.alpha.mode().unwrap_or_else(|| vec![1.0 / k as f64; k]);
    floor_and_normalize(&mut theta);
    let mut next = vec![0.0; k];
    for _ in 0..FAST_UPDATE_MAX_ITER {
        let mix: f64 = dens.iter().zip(&theta).map(|(&p, &t)| p * t).sum();
        for z in 0..k {
            next[z] = dens[z] * theta[z] / mix + alpha[z] - 1.0;
        }
        floor_and_normalize(&mut next);
        let delta = theta
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        theta.copy_from_slice(&next);
        if delta < FAST_UPDATE_TOL {
            return theta;
        }
    }
    log::warn!("fast_update hit the {FAST_UPDATE_MAX_ITER}-iteration cap");
    theta
}
