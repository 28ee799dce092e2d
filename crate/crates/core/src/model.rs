//! The latent-class rating model: K classes, a Gaussian rating density per
//! (class, item) pair in normalized units, and a class-membership simplex per
//! training user. Trained with EM on normalized ratings.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dataset::{Dataset, NormalizedRatings, UserNormStats};
use crate::error::ModelError;
use crate::math::{self, gaussian_pdf, sample_dirichlet};
use crate::{ItemId, UserId};

/// Responsibility mass below this keeps the previous Gaussian parameters
/// instead of re-estimating from effectively no data.
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AspectModel {
    k: usize,
    num_items: usize,
    rating_scale: u32,
    sigma_floor: f64,
    /// Row-major `k x num_items`.
    mu: Vec<f64>,
    sigma: Vec<f64>,
    /// Row-major `num_train_users x k`.
    user_simplex: Vec<f64>,
}

impl AspectModel {
    /// Assemble a model from raw parameter tables, validating invariants.
    pub fn new(
        k: usize,
        num_items: usize,
        rating_scale: u32,
        sigma_floor: f64,
        mu: Vec<f64>,
        sigma: Vec<f64>,
        user_simplex: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if k < 1 {
            return Err(ModelError::InvalidClassCount(k));
        }
        if mu.len() != k * num_items || sigma.len() != k * num_items {
            return Err(ModelError::InvalidParameters("gaussian table size mismatch"));
        }
        if user_simplex.len() % k != 0 {
            return Err(ModelError::InvalidParameters("simplex table size mismatch"));
        }
        if !(sigma_floor > 0.0) {
            return Err(ModelError::InvalidParameters("sigma_floor must be > 0"));
        }
        if sigma.iter().any(|&s| s < sigma_floor || !s.is_finite()) {
            return Err(ModelError::InvalidParameters("sigma below floor"));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(ModelError::InvalidParameters("non-finite mu"));
        }
        for row in user_simplex.chunks(k) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                return Err(ModelError::InvalidParameters("user simplex not on the simplex"));
            }
        }
        Ok(AspectModel { k, num_items, rating_scale, sigma_floor, mu, sigma, user_simplex })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_train_users(&self) -> usize {
        self.user_simplex.len() / self.k
    }

    pub fn rating_scale(&self) -> u32 {
        self.rating_scale
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    #[inline]
    pub fn mu(&self, z: usize, x: ItemId) -> f64 {
        self.mu[z * self.num_items + x as usize]
    }

    #[inline]
    pub fn sigma(&self, z: usize, x: ItemId) -> f64 {
        self.sigma[z * self.num_items + x as usize]
    }

    /// p(z|y) row of a training user.
    pub fn user_simplex(&self, user: UserId) -> &[f64] {
        &self.user_simplex[user as usize * self.k..(user as usize + 1) * self.k]
    }

    pub fn mu_table(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma_table(&self) -> &[f64] {
        &self.sigma
    }

    pub fn simplex_table(&self) -> &[f64] {
        &self.user_simplex
    }
}

/// EM training configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Stop when the relative log-likelihood improvement drops below this.
    pub loglik_tol: f64,
    /// Lower bound on every Gaussian std, in normalized units.
    pub sigma_floor: f64,
    /// Seed for the random responsibility initialization.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        TrainConfig { k, seed, ..TrainConfig::default() }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { k: 5, max_iter: 200, loglik_tol: 1e-6, sigma_floor: 0.05, seed: 0 }
    }
}

/// A trained model plus the log-likelihood recorded after every iteration.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AspectModel,
    pub loglik: Vec<f64>,
}

/// Train the model by EM. Per-user simplices start from symmetric
/// Dirichlet(1) draws; each iteration runs an M-step from the current
/// responsibilities followed by an E-step that also records the
/// log-likelihood of the freshly updated parameters.
pub fn train_em(
    dataset: &Dataset,
    normalized: &NormalizedRatings,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    if cfg.k < 1 {
        return Err(ModelError::InvalidClassCount(cfg.k));
    }
    if dataset.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let k = cfg.k;
    let m = dataset.num_items();
    let n_users = dataset.num_users();
    let n = dataset.len();

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let ones = vec![1.0; k];
    let mut simplex: Vec<f64> = Vec::with_capacity(n_users * k);
    for _ in 0..n_users {
        simplex.extend_from_slice(&sample_dirichlet(&ones, &mut rng));
    }

    // Initial responsibilities mirror the user simplex: before the first
    // M-step no class-conditional densities exist, so evidence is flat.
    let mut resp = vec![0.0; n * k];
    for (t, triple) in dataset.triples().iter().enumerate() {
        let row = &simplex[triple.user as usize * k..(triple.user as usize + 1) * k];
        resp[t * k..(t + 1) * k].copy_from_slice(row);
    }

    // Items never rated keep the uninformative prior N(0, 1).
    let mut mu = vec![0.0; k * m];
    let mut sigma = vec![1.0; k * m];
    let user_sizes: Vec<f64> =
        (0..n_users).map(|u| dataset.user_ratings(u as UserId).len() as f64).collect();

    let mut loglik = Vec::new();
    for iter in 0..cfg.max_iter {
        // M-step: user simplices.
        simplex.iter_mut().for_each(|p| *p = 0.0);
        for (t, triple) in dataset.triples().iter().enumerate() {
            let u = triple.user as usize;
            for z in 0..k {
                simplex[u * k + z] += resp[t * k + z];
            }
        }
        for u in 0..n_users {
            for z in 0..k {
                simplex[u * k + z] /= user_sizes[u];
            }
        }

        // M-step: per (class, item) Gaussians.
        let mut w = vec![0.0; k * m];
        let mut s1 = vec![0.0; k * m];
        let mut s2 = vec![0.0; k * m];
        for (t, triple) in dataset.triples().iter().enumerate() {
            let x = triple.item as usize;
            let v = normalized.values[t];
            for z in 0..k {
                let r = resp[t * k + z];
                w[z * m + x] += r;
                s1[z * m + x] += r * v;
                s2[z * m + x] += r * v * v;
            }
        }
        for i in 0..k * m {
            if w[i] > WEIGHT_EPS {
                let mean = s1[i] / w[i];
                let var = (s2[i] / w[i] - mean * mean).max(0.0);
                mu[i] = mean;
                sigma[i] = math::sqrt(var).max(cfg.sigma_floor);
            }
        }

        // E-step: responsibilities and log-likelihood of the new parameters.
        let mut ll = 0.0;
        for (t, triple) in dataset.triples().iter().enumerate() {
            let u = triple.user as usize;
            let x = triple.item as usize;
            let v = normalized.values[t];
            let mut mix = 0.0;
            for z in 0..k {
                let d = simplex[u * k + z] * gaussian_pdf(v, mu[z * m + x], sigma[z * m + x]);
                resp[t * k + z] = d;
                mix += d;
            }
            ll += math::ln(mix.max(f64::MIN_POSITIVE));
            for z in 0..k {
                resp[t * k + z] /= mix;
            }
        }
        loglik.push(ll);
        if iter > 0 {
            let prev = loglik[iter - 1];
            if ll - prev < cfg.loglik_tol * prev.abs().max(1.0) {
                break;
            }
        }
    }

    let model = AspectModel {
        k,
        num_items: m,
        rating_scale: dataset.rating_scale(),
        sigma_floor: cfg.sigma_floor,
        mu,
        sigma,
        user_simplex: simplex,
    };
    Ok(TrainOutcome { model, loglik })
}

/// Log-likelihood of a normalized dataset under the model:
/// `sum over triples of ln sum_z p(z|y) N(v; mu_zx, sigma_zx)`.
pub fn log_likelihood(
    model: &AspectModel,
    dataset: &Dataset,
    normalized: &NormalizedRatings,
) -> Result<f64, ModelError> {
    let mut ll = 0.0;
    for (t, triple) in dataset.triples().iter().enumerate() {
        if triple.item as usize >= model.num_items {
            return Err(ModelError::UnknownItem(triple.item));
        }
        if triple.user as usize >= model.num_train_users() {
            return Err(ModelError::UnknownUser(triple.user));
        }
        let weights = model.user_simplex(triple.user);
        let v = normalized.values[t];
        let mix: f64 = (0..model.k)
            .map(|z| weights[z] * gaussian_pdf(v, model.mu(z, triple.item), model.sigma(z, triple.item)))
            .sum();
        ll += math::ln(mix.max(f64::MIN_POSITIVE));
    }
    Ok(ll)
}

/// Class-conditional density of a raw rating: the Gaussian density of the
/// user-normalized value of `r` under the (class, item) parameters.
pub fn rating_likelihood(
    model: &AspectModel,
    z: usize,
    x: ItemId,
    r: u32,
    stats: &UserNormStats,
) -> Result<f64, ModelError> {
    if z >= model.k {
        return Err(ModelError::UnknownClass(z));
    }
    if x as usize >= model.num_items {
        return Err(ModelError::UnknownItem(x));
    }
    debug_assert!(r >= 1 && r <= model.rating_scale);
    Ok(gaussian_pdf(stats.normalize(r as f64), model.mu(z, x), model.sigma(z, x)))
}

/// Weights of each scale point for a user with class weights `theta`.
///
/// `raw` mixes the class-conditional Gaussian densities; it does not sum
/// to 1 over the discrete scale. `normalized` rescales it so it does.
#[derive(Debug, Clone)]
pub struct RatingWeights {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl RatingWeights {
    /// Weight of rating `r` (1-based).
    pub fn raw_of(&self, r: u32) -> f64 {
        self.raw[(r - 1) as usize]
    }

    pub fn normalized_of(&self, r: u32) -> f64 {
        self.normalized[(r - 1) as usize]
    }
}

/// Distribution over the rating scale for item `x` under class weights
/// `theta`, both as raw Gaussian mixture weights and normalized to sum 1.
pub fn rating_distribution(
    model: &AspectModel,
    theta: &[f64],
    x: ItemId,
    stats: &UserNormStats,
) -> RatingWeights {
    debug_assert_eq!(theta.len(), model.k);
    debug_assert!((x as usize) < model.num_items);
    let raw: Vec<f64> = (1..=model.rating_scale)
        .map(|r| {
            let v = stats.normalize(r as f64);
            (0..model.k).map(|z| theta[z] * gaussian_pdf(v, model.mu(z, x), model.sigma(z, x))).sum()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let normalized = raw.iter().map(|&w| w / total).collect();
    RatingWeights { raw, normalized }
}

/// Posterior-mean rating prediction: `sum_z theta_z mu_zx`, denormalized
/// with the user's stats and clamped to the rating scale.
pub fn predict_rating(
    model: &AspectModel,
    theta: &[f64],
    x: ItemId,
    stats: &UserNormStats,
) -> Result<f64, ModelError> {
    if x as usize >= model.num_items {
        return Err(ModelError::UnknownItem(x));
    }
    debug_assert_eq!(theta.len(), model.k);
    let value: f64 = (0..model.k).map(|z| theta[z] * model.mu(z, x)).sum();
    Ok(stats.denormalize(value).clamp(1.0, model.rating_scale() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, normalize, RatingTriple, SynthConfig};
    use alloc::string::ToString;

    fn single_class_model(mu: Vec<f64>, sigma: Vec<f64>) -> AspectModel {
        let items = mu.len();
        AspectModel::new(1, items, 5, 0.05, mu, sigma, vec![1.0]).unwrap()
    }

    fn small_dataset() -> (Dataset, NormalizedRatings) {
        let ds = Dataset::from_triples(
            vec![
                RatingTriple { user: 0, item: 0, rating: 2 },
                RatingTriple { user: 0, item: 1, rating: 4 },
                RatingTriple { user: 1, item: 0, rating: 5 },
                RatingTriple { user: 1, item: 1, rating: 1 },
                RatingTriple { user: 1, item: 2, rating: 3 },
            ],
            5,
            vec!["a".to_string(), "b".to_string()],
            vec!["x".to_string(), "y".to_string(), "z".to_string()],
        )
        .unwrap();
        let norm = normalize(&ds);
        (ds, norm)
    }

    #[test]
    fn k1_recovers_item_means() {
        let (ds, norm) = small_dataset();
        let out = train_em(&ds, &norm, &TrainConfig { k: 1, seed: 1, ..TrainConfig::default() })
            .unwrap();
        // mu_{1,x} must equal the mean normalized rating of item x
        for x in 0..ds.num_items() {
            let vals: Vec<f64> = ds
                .triples()
                .iter()
                .zip(&norm.values)
                .filter(|(t, _)| t.item as usize == x)
                .map(|(_, &v)| v)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((out.model.mu(0, x as ItemId) - mean).abs() < 1e-12);
        }
        for u in 0..ds.num_users() {
            assert_eq!(out.model.user_simplex(u as UserId), &[1.0]);
        }
    }

    #[test]
    fn em_loglik_is_monotone() {
        let synth = generate_synthetic(&SynthConfig {
            users: 50,
            items: 20,
            ratings_per_user: 10,
            seed: 9,
            ..SynthConfig::default()
        })
        .unwrap();
        let norm = normalize(&synth.dataset);
        let out = train_em(
            &synth.dataset,
            &norm,
            &TrainConfig { k: 3, seed: 4, ..TrainConfig::default() },
        )
        .unwrap();
        assert!(out.loglik.len() >= 2);
        for pair in out.loglik.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "log-likelihood decreased: {pair:?}");
        }
        // simplices stay on the simplex, sigmas above the floor
        for u in 0..synth.dataset.num_users() {
            let row = out.model.user_simplex(u as UserId);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p >= 0.0));
        }
        assert!(out.model.sigma_table().iter().all(|&s| s >= 0.05));
    }

    #[test]
    fn log_likelihood_matches_brute_force() {
        let (ds, norm) = small_dataset();
        let out = train_em(&ds, &norm, &TrainConfig { k: 2, seed: 7, ..TrainConfig::default() })
            .unwrap();
        let model = &out.model;
        // independent summation, straight from the definition
        let mut expected = 0.0;
        for (t, triple) in ds.triples().iter().enumerate() {
            let mut mix = 0.0;
            for z in 0..model.k() {
                let mu = model.mu(z, triple.item);
                let sg = model.sigma(z, triple.item);
                let v = norm.values[t];
                let d = (-0.5 * ((v - mu) / sg) * ((v - mu) / sg)).exp()
                    / (sg * (2.0 * core::f64::consts::PI).sqrt());
                mix += model.user_simplex(triple.user)[z] * d;
            }
            expected += mix.ln();
        }
        let got = log_likelihood(model, &ds, &norm).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn log_likelihood_peak_and_additivity() {
        // single triple at the Gaussian peak with sigma = 1
        let model = single_class_model(vec![0.0], vec![1.0]);
        let ds = Dataset::from_triples(
            vec![RatingTriple { user: 0, item: 0, rating: 3 }],
            5,
            vec!["a".to_string()],
            vec!["x".to_string()],
        )
        .unwrap();
        let norm = normalize(&ds); // single rating normalizes to 0
        let ll = log_likelihood(&model, &ds, &norm).unwrap();
        assert!((ll - (-0.9189385332046727)).abs() < 1e-9);
    }

    #[test]
    fn rating_likelihood_peak_and_symmetry() {
        let model = single_class_model(vec![0.0], vec![0.5]);
        let stats = UserNormStats { mean: 3.0, std: 1.0 };
        // r = 3 normalizes to exactly mu = 0
        let peak = rating_likelihood(&model, 0, 0, 3, &stats).unwrap();
        assert!((peak - 0.7978845608028654).abs() < 1e-9);
        let lo = rating_likelihood(&model, 0, 0, 2, &stats).unwrap();
        let hi = rating_likelihood(&model, 0, 0, 4, &stats).unwrap();
        assert!((lo - hi).abs() < 1e-12);
        assert!(rating_likelihood(&model, 1, 0, 3, &stats).is_err());
        assert!(rating_likelihood(&model, 0, 9, 3, &stats).is_err());
    }

    #[test]
    fn rating_distribution_normalizes() {
        let model = AspectModel::new(
            2,
            1,
            5,
            0.05,
            vec![-1.0, 1.0],
            vec![0.6, 0.6],
            vec![],
        )
        .unwrap();
        // std 1.4 puts the scale points 0.714 apart in normalized units, so
        // the Gaussian grid sum lands well away from 1
        let stats = UserNormStats { mean: 3.0, std: 1.4 };
        let w = rating_distribution(&model, &[0.3, 0.7], 0, &stats);
        let raw_sum: f64 = w.raw.iter().sum();
        let norm_sum: f64 = w.normalized.iter().sum();
        assert!((norm_sum - 1.0).abs() < 1e-12);
        assert!((raw_sum - 1.0).abs() > 1e-2, "raw weights generally do not sum to 1");
        // concentrated density: k=1, mu at normalized r=3, tiny sigma
        let peaked = single_class_model(vec![0.0], vec![0.05]);
        let w = rating_distribution(&peaked, &[1.0], 0, &stats);
        assert!(w.normalized_of(3) > 0.99);
    }

    #[test]
    fn predict_rating_denormalizes_and_clamps() {
        let model = single_class_model(vec![0.0, 4.5], vec![1.0, 1.0]);
        let stats = UserNormStats { mean: 3.2, std: 1.0 };
        let p = predict_rating(&model, &[1.0], 0, &stats).unwrap();
        assert!((p - 3.2).abs() < 1e-12);
        // denormalizes to 7.7 on a 1..5 scale -> clamped
        let p = predict_rating(&model, &[1.0], 1, &stats).unwrap();
        assert_eq!(p, 5.0);
        // two balanced classes with opposite means cancel
        let sym = AspectModel::new(2, 1, 5, 0.05, vec![-1.0, 1.0], vec![1.0, 1.0], vec![])
            .unwrap();
        let p = predict_rating(&sym, &[0.5, 0.5], 0, &stats).unwrap();
        assert!((p - 3.2).abs() < 1e-12);
        assert!(predict_rating(&model, &[1.0], 7, &stats).is_err());
    }

    #[test]
    fn train_rejects_bad_config() {
        let (ds, norm) = small_dataset();
        assert!(matches!(
            train_em(&ds, &norm, &TrainConfig { k: 0, ..TrainConfig::default() }),
            Err(ModelError::InvalidClassCount(0))
        ));
    }
}
