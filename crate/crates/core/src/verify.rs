//! Self-verification checks: the analytic Bayesian loss against its
//! Monte-Carlo estimate, Dirichlet moment identities, digamma accuracy, and
//! the fast one-example update against a full re-fold-in. The CLI `verify`
//! subcommand and the acceptance suite both run these.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::active::{dirichlet_posterior, fast_update, fold_in, ActiveUserState, DirichletParams, FoldConfig};
use crate::dataset::{generate_synthetic, SynthConfig, UserNormStats};
use crate::math::{self, digamma, sample_dirichlet, splitmix64};
use crate::model::AspectModel;
use crate::strategies::{loss_bayesian, mc_expected_loss};

const EULER_GAMMA: f64 = 0.5772156649015328606;

/// A random (model, posterior) pair for loss evaluation: K classes over a
/// couple of items on a 1..5 scale, hyperparameters in [1, 6].
fn random_instance(k: usize, rng: &mut ChaCha12Rng) -> (AspectModel, ActiveUserState) {
    let items = 2;
    let mu: Vec<f64> = (0..k * items).map(|_| rng.random_range(-1.5..1.5)).collect();
    let sigma: Vec<f64> = (0..k * items).map(|_| rng.random_range(0.3..1.2)).collect();
    let model = AspectModel::new(k, items, 5, 0.05, mu, sigma, vec![]).expect("valid");
    let alpha: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..6.0)).collect();
    let stats = UserNormStats {
        mean: rng.random_range(2.0..4.0),
        std: rng.random_range(0.8..1.6),
    };
    let state = ActiveUserState::from_alpha(DirichletParams::new(alpha).expect("valid"), stats);
    (model, state)
}

#[derive(Debug, Clone)]
pub struct AnalyticMcTrial {
    pub k: usize,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub within_three_se: bool,
}

/// Closed-form Bayesian loss vs. its Monte-Carlo estimate on random
/// instances; passes when at least 95% agree within three standard errors.
#[derive(Debug, Clone)]
pub struct AnalyticMcCheck {
    pub trials: Vec<AnalyticMcTrial>,
    pub within: usize,
    pub passed: bool,
}

pub fn analytic_vs_mc_check(instances: usize, samples: usize, seed: u64) -> AnalyticMcCheck {
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ 0xB41E5)); // unique stream
    let mut trials = Vec::with_capacity(instances);
    for i in 0..instances {
        let k = 2 + i % 3;
        let (model, state) = random_instance(k, &mut rng);
        let x = rng.random_range(0..model.num_items() as u32);
        let analytic = loss_bayesian(&model, &state, x).expect("valid instance");
        let (mc_mean, mc_stderr) =
            mc_expected_loss(&model, &state, x, samples, &mut rng).expect("valid instance");
        let within_three_se = (analytic - mc_mean).abs() <= 3.0 * mc_stderr;
        trials.push(AnalyticMcTrial { k, analytic, mc_mean, mc_stderr, within_three_se });
    }
    let within = trials.iter().filter(|t| t.within_three_se).count();
    let passed = within * 100 >= instances * 95;
    AnalyticMcCheck { trials, within, passed }
}

#[derive(Debug, Clone)]
pub struct MomentTrial {
    pub k: usize,
    /// Largest |E_mc[ln theta_j] - (psi(alpha_j) - psi(alpha*))| in stderr units.
    pub elog_max_se: f64,
    /// Largest |(alpha_z - 1)/(alpha* - K) - theta*_z| over a fold-in state.
    pub mode_err: f64,
}

/// Dirichlet machinery: `E[ln theta_j] = psi(alpha_j) - psi(alpha*)` within
/// three MC standard errors, and the mode identity
/// `(alpha_z - 1)/(alpha* - K) = theta*_z` within 1e-6 on fold-in states.
#[derive(Debug, Clone)]
pub struct DirichletMomentCheck {
    pub trials: Vec<MomentTrial>,
    pub max_mode_err: f64,
    pub passed: bool,
}

pub fn dirichlet_moment_check(instances: usize, samples: usize, seed: u64) -> DirichletMomentCheck {
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ 0xD1A1C));
    let mut trials = Vec::with_capacity(instances);
    for i in 0..instances {
        let k = 2 + i % 3;

        // (a) E[ln theta_j] against the digamma closed form
        let alpha: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..6.0)).collect();
        let a_star: f64 = alpha.iter().sum();
        let mut sum = vec![0.0; k];
        let mut sum_sq = vec![0.0; k];
        for _ in 0..samples {
            let theta = sample_dirichlet(&alpha, &mut rng);
            for j in 0..k {
                let l = math::ln(theta[j].max(f64::MIN_POSITIVE));
                sum[j] += l;
                sum_sq[j] += l * l;
            }
        }
        let n = samples as f64;
        let mut elog_max_se = 0.0f64;
        for j in 0..k {
            let mean = sum[j] / n;
            let var = ((sum_sq[j] - sum[j] * sum[j] / n) / (n - 1.0)).max(0.0);
            let se = math::sqrt(var / n).max(1e-15);
            let closed = digamma(alpha[j]) - digamma(a_star);
            elog_max_se = elog_max_se.max((mean - closed).abs() / se);
        }

        // (b) mode identity on a genuine fold-in state
        let items = 10;
        let mu: Vec<f64> = (0..k * items).map(|_| rng.random_range(-1.2..1.2)).collect();
        let sigma: Vec<f64> = (0..k * items).map(|_| rng.random_range(0.3..1.0)).collect();
        let model = AspectModel::new(k, items, 5, 0.05, mu, sigma, vec![]).expect("valid");
        let n_revealed = rng.random_range(3..=8usize);
        let mut item_ids: Vec<u32> = (0..items as u32).collect();
        use rand::seq::SliceRandom;
        item_ids.shuffle(&mut rng);
        let revealed: Vec<(u32, u32)> = item_ids
            .into_iter()
            .take(n_revealed)
            .map(|x| (x, rng.random_range(1..=5u32)))
            .collect();
        let theta = fold_in(&model, &revealed, 1e-13, 50_000);
        let alpha = dirichlet_posterior(&model, &revealed, &theta);
        let mode = alpha.mode().expect("revealed is non-empty");
        let mode_err = mode
            .iter()
            .zip(&theta)
            .map(|(&m, &t)| (m - t).abs())
            .fold(0.0f64, f64::max);

        trials.push(MomentTrial { k, elog_max_se, mode_err });
    }
    let max_mode_err = trials.iter().map(|t| t.mode_err).fold(0.0f64, f64::max);
    let passed = trials.iter().all(|t| t.elog_max_se <= 3.0 && t.mode_err <= 1e-6);
    DirichletMomentCheck { trials, max_mode_err, passed }
}

/// Digamma values at reference points with known closed forms.
#[derive(Debug, Clone)]
pub struct DigammaCheck {
    /// (x, computed, reference) per point.
    pub points: Vec<(f64, f64, f64)>,
    pub max_abs_err: f64,
    pub passed: bool,
}

pub fn digamma_check() -> DigammaCheck {
    let psi_half = -EULER_GAMMA - 2.0 * core::f64::consts::LN_2;
    // recurrence psi(x+1) = psi(x) + 1/x from the half-integer identity
    let psi_5_5 = psi_half + 2.0 + 2.0 / 3.0 + 2.0 / 5.0 + 2.0 / 7.0 + 2.0 / 9.0;
    let harmonic_9: f64 = (1..=9).map(|n| 1.0 / n as f64).sum();
    let refs = [
        (0.5, psi_half),
        (1.0, -EULER_GAMMA),
        (2.0, 1.0 - EULER_GAMMA),
        (5.5, psi_5_5),
        (10.0, -EULER_GAMMA + harmonic_9),
    ];
    let points: Vec<(f64, f64, f64)> =
        refs.iter().map(|&(x, r)| (x, digamma(x), r)).collect();
    let max_abs_err =
        points.iter().map(|&(_, got, want)| (got - want).abs()).fold(0.0f64, f64::max);
    DigammaCheck { points, max_abs_err, passed: max_abs_err < 1e-10 }
}

#[derive(Debug, Clone)]
pub struct FastUpdateTrial {
    pub revealed: usize,
    pub tv: f64,
}

/// Total-variation distance between the fast one-example update and a full
/// re-fold-in over the enlarged revealed set, on users drawn from the
/// synthetic generative process. Passes when every trial stays within 0.05.
#[derive(Debug, Clone)]
pub struct FastUpdateCheck {
    pub trials: Vec<FastUpdateTrial>,
    pub max_tv: f64,
    pub passed: bool,
}

pub fn fast_update_check(instances: usize, seed: u64) -> FastUpdateCheck {
    let mut trials = Vec::with_capacity(instances);
    for i in 0..instances {
        let synth = generate_synthetic(&SynthConfig {
            classes: 2 + i % 3,
            users: 8,
            items: 40,
            ratings_per_user: 12,
            seed: splitmix64(seed ^ 0xFA57 ^ (i as u64) << 8),
            ..SynthConfig::default()
        })
        .expect("valid synth config");
        let model = &synth.truth;
        let user = (i % 8) as u32;
        let ratings = synth.dataset.user_ratings(user);
        let n_revealed = 3 + i % 6;
        let revealed: Vec<(u32, u32)> = ratings[..n_revealed].to_vec();
        let (x, r) = ratings[n_revealed];

        let state =
            ActiveUserState::from_revealed(model, revealed.clone(), &FoldConfig::default())
                .expect("valid revealed set");
        let fast = fast_update(model, &state, x, r);

        let mut enlarged = revealed;
        enlarged.push((x, r));
        let full = fold_in(model, &enlarged, 1e-12, 50_000);

        let tv = 0.5_f64
            * fast.iter().zip(&full).map(|(&a, &b)| (a - b).abs()).sum::<f64>();
        trials.push(FastUpdateTrial { revealed: n_revealed, tv });
    }
    let max_tv = trials.iter().map(|t| t.tv).fold(0.0f64, f64::max);
    FastUpdateCheck { trials, max_tv, passed: max_tv <= 0.05 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_check_passes() {
        let check = digamma_check();
        assert!(check.passed, "max err {}", check.max_abs_err);
    }

    #[test]
    fn small_analytic_mc_check_passes() {
        let check = analytic_vs_mc_check(10, 20_000, 7);
        assert!(check.passed, "{} of {} within 3 se", check.within, check.trials.len());
    }
}
