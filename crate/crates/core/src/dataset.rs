//! Rating triples, per-user normalization, experiment splits, and the
//! synthetic generator whose ground-truth model doubles as a test oracle.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::DatasetError;
use crate::math::{self, sample_dirichlet, splitmix64};
use crate::model::AspectModel;
use crate::{ItemId, UserId};

/// Standard deviations below this are clamped so constant raters normalize
/// to zero instead of dividing by zero. In rating units.
pub const STD_FLOOR: f64 = 1e-3;

/// One observed rating: user `user` gave item `item` the value `rating`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatingTriple {
    pub user: UserId,
    pub item: ItemId,
    pub rating: u32,
}

/// An immutable collection of rating triples with dense internal ids,
/// a declared scale `[1, R]`, and a per-user index.
#[derive(Debug, Clone)]
pub struct Dataset {
    triples: Vec<RatingTriple>,
    rating_scale: u32,
    user_labels: Vec<String>,
    item_labels: Vec<String>,
    per_user: Vec<Vec<(ItemId, u32)>>,
}

impl Dataset {
    /// Build a dataset from triples whose ids are already dense
    /// (`user < user_labels.len()`, `item < item_labels.len()`).
    pub fn from_triples(
        triples: Vec<RatingTriple>,
        rating_scale: u32,
        user_labels: Vec<String>,
        item_labels: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if rating_scale < 2 {
            return Err(DatasetError::InvalidScale(rating_scale));
        }
        if triples.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut per_user: Vec<Vec<(ItemId, u32)>> = vec![Vec::new(); user_labels.len()];
        for t in &triples {
            if t.user as usize >= user_labels.len() || t.item as usize >= item_labels.len() {
                return Err(DatasetError::IdOutOfRange { user: t.user, item: t.item });
            }
            if t.rating < 1 || t.rating > rating_scale {
                return Err(DatasetError::RatingOutOfScale {
                    user: t.user,
                    item: t.item,
                    rating: t.rating,
                    scale: rating_scale,
                });
            }
            if !seen.insert((t.user, t.item)) {
                return Err(DatasetError::DuplicatePair { user: t.user, item: t.item });
            }
            per_user[t.user as usize].push((t.item, t.rating));
        }
        for (u, ratings) in per_user.iter_mut().enumerate() {
            if ratings.is_empty() {
                return Err(DatasetError::UserWithoutRatings(u as UserId));
            }
            ratings.sort_unstable();
        }
        Ok(Dataset { triples, rating_scale, user_labels, item_labels, per_user })
    }

    pub fn num_users(&self) -> usize {
        self.user_labels.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_labels.len()
    }

    pub fn rating_scale(&self) -> u32 {
        self.rating_scale
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[RatingTriple] {
        &self.triples
    }

    /// The user's (item, rating) pairs, sorted by item id.
    pub fn user_ratings(&self, user: UserId) -> &[(ItemId, u32)] {
        &self.per_user[user as usize]
    }

    pub fn user_label(&self, user: UserId) -> &str {
        &self.user_labels[user as usize]
    }

    pub fn item_label(&self, item: ItemId) -> &str {
        &self.item_labels[item as usize]
    }

    /// Restrict to the given users, renumbering them densely in the given
    /// order. Item ids and labels are kept as-is.
    pub fn subset_of_users(&self, users: &[UserId]) -> Result<Dataset, DatasetError> {
        let mut triples = Vec::new();
        let mut labels = Vec::with_capacity(users.len());
        for (new_id, &u) in users.iter().enumerate() {
            labels.push(self.user_labels[u as usize].clone());
            for &(item, rating) in self.user_ratings(u) {
                triples.push(RatingTriple { user: new_id as UserId, item, rating });
            }
        }
        Dataset::from_triples(triples, self.rating_scale, labels, self.item_labels.clone())
    }
}

/// Per-user normalization statistics: mean and population standard deviation
/// (floored at [`STD_FLOOR`]) of the user's raw ratings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserNormStats {
    pub mean: f64,
    pub std: f64,
}

impl UserNormStats {
    /// Mean and population std of the given raw ratings.
    pub fn from_ratings(ratings: &[u32]) -> Self {
        assert!(!ratings.is_empty(), "normalization stats need at least one rating");
        let n = ratings.len() as f64;
        let mean = ratings.iter().map(|&r| r as f64).sum::<f64>() / n;
        let var = ratings.iter().map(|&r| (r as f64 - mean) * (r as f64 - mean)).sum::<f64>() / n;
        UserNormStats { mean, std: math::sqrt(var).max(STD_FLOOR) }
    }

    #[inline]
    pub fn normalize(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }

    #[inline]
    pub fn denormalize(&self, value: f64) -> f64 {
        value * self.std + self.mean
    }
}

/// Per-triple normalized rating values plus the per-user stats behind them.
#[derive(Debug, Clone)]
pub struct NormalizedRatings {
    /// Aligned with `Dataset::triples`.
    pub values: Vec<f64>,
    /// Indexed by user id.
    pub stats: Vec<UserNormStats>,
}

/// Normalize every user's ratings to mean 0 / std 1 on their own data
/// (std clamped at [`STD_FLOOR`] for constant raters).
pub fn normalize(dataset: &Dataset) -> NormalizedRatings {
    let stats: Vec<UserNormStats> = (0..dataset.num_users())
        .map(|u| {
            let raw: Vec<u32> =
                dataset.user_ratings(u as UserId).iter().map(|&(_, r)| r).collect();
            UserNormStats::from_ratings(&raw)
        })
        .collect();
    let values = dataset
        .triples()
        .iter()
        .map(|t| stats[t.user as usize].normalize(t.rating as f64))
        .collect();
    NormalizedRatings { values, stats }
}

/// One test user's portion of the experiment split.
#[derive(Debug, Clone)]
pub struct TestUserSplit {
    pub user: UserId,
    /// The initially revealed ratings.
    pub seed_items: Vec<(ItemId, u32)>,
    /// Reserved for MAE evaluation only; never queried.
    pub holdout: Vec<(ItemId, u32)>,
    /// Remaining observed ratings available for querying, sorted by item id.
    pub candidates: Vec<(ItemId, u32)>,
}

/// Train/test user partition with per-test-user seed/holdout/candidate sets.
#[derive(Debug, Clone)]
pub struct ExperimentSplit {
    pub train_users: Vec<UserId>,
    pub test_users: Vec<TestUserSplit>,
}

/// Partition users into the first `train_user_count` training users and the
/// rest as test users; per test user, draw `seed_count` seed ratings and
/// `holdout_count` holdout ratings at random, leaving the remainder as the
/// candidate pool. Test users without at least
/// `seed_count + holdout_count + 1` ratings are excluded with a warning.
pub fn split_protocol(
    dataset: &Dataset,
    train_user_count: usize,
    seed_count: usize,
    holdout_count: usize,
    seed: u64,
) -> Result<ExperimentSplit, DatasetError> {
    if train_user_count >= dataset.num_users() {
        return Err(DatasetError::NotEnoughUsers {
            available: dataset.num_users(),
            requested: train_user_count,
        });
    }
    let train_users: Vec<UserId> = (0..train_user_count as UserId).collect();
    let mut test_users = Vec::new();
    for u in train_user_count..dataset.num_users() {
        let u = u as UserId;
        let ratings = dataset.user_ratings(u);
        if ratings.len() < seed_count + holdout_count + 1 {
            log::warn!(
                "excluding test user {u}: {} ratings < {} required",
                ratings.len(),
                seed_count + holdout_count + 1
            );
            continue;
        }
        // Independent per-user stream so exclusions don't shift later draws.
        let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(u as u64)));
        let mut shuffled = ratings.to_vec();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let seed_items = shuffled[..seed_count].to_vec();
        let holdout = shuffled[seed_count..seed_count + holdout_count].to_vec();
        let mut candidates = shuffled[seed_count + holdout_count..].to_vec();
        candidates.sort_unstable();
        test_users.push(TestUserSplit { user: u, seed_items, holdout, candidates });
    }
    if test_users.is_empty() {
        return Err(DatasetError::NoEligibleTestUsers);
    }
    Ok(ExperimentSplit { train_users, test_users })
}

/// Synthetic generator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub users: usize,
    pub items: usize,
    pub ratings_per_user: usize,
    pub rating_scale: u32,
    /// Gaussian noise std of every (class, item) rating density, in
    /// normalized units.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 4,
            users: 300,
            items: 50,
            ratings_per_user: 30,
            rating_scale: 5,
            noise_sigma: 0.3,
            seed: 0,
        }
    }
}

/// Output of the synthetic generator.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// The generating model; class-conditional means/stds in normalized
    /// units and the per-user simplices that were actually sampled.
    pub truth: AspectModel,
    /// How many ratings were drawn from each latent class.
    pub class_draws: Vec<u64>,
}

/// Class-conditional item means are drawn from this range (normalized units).
const SYNTH_MU_RANGE: f64 = 1.2;

/// Sample a dataset from the latent-class generative process: per user a
/// class simplex from the uniform Dirichlet, per rated item a class from
/// that simplex, then a normalized rating from the class-item Gaussian,
/// denormalized against the scale midpoint and rounded to the nearest
/// scale point.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Synthetic, DatasetError> {
    if cfg.classes < 1 {
        return Err(DatasetError::InvalidSynthConfig("classes must be >= 1"));
    }
    if cfg.users < 1 {
        return Err(DatasetError::InvalidSynthConfig("users must be >= 1"));
    }
    if cfg.items < 1 {
        return Err(DatasetError::InvalidSynthConfig("items must be >= 1"));
    }
    if cfg.ratings_per_user < 1 || cfg.ratings_per_user > cfg.items {
        return Err(DatasetError::InvalidSynthConfig(
            "ratings_per_user must be in [1, items]",
        ));
    }
    if cfg.rating_scale < 2 {
        return Err(DatasetError::InvalidSynthConfig("rating_scale must be >= 2"));
    }
    if !(cfg.noise_sigma > 0.0) {
        return Err(DatasetError::InvalidSynthConfig("noise_sigma must be > 0"));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let k = cfg.classes;
    let m = cfg.items;

    let mu: Vec<f64> =
        (0..k * m).map(|_| rng.random_range(-SYNTH_MU_RANGE..SYNTH_MU_RANGE)).collect();
    let sigma = vec![cfg.noise_sigma; k * m];

    // Denormalization anchors: scale midpoint and the population std of a
    // uniform draw over {1..R}, so normalized values span the scale.
    let r = cfg.rating_scale;
    let anchor_mean = (1.0 + r as f64) / 2.0;
    let anchor_std = math::sqrt(((r * r - 1) as f64) / 12.0);

    let uniform_alpha = vec![1.0; k];
    let mut simplices = Vec::with_capacity(cfg.users * k);
    let mut triples = Vec::with_capacity(cfg.users * cfg.ratings_per_user);
    let mut class_draws = vec![0u64; k];

    for user in 0..cfg.users {
        let simplex = sample_dirichlet(&uniform_alpha, &mut rng);
        let mut items: Vec<usize> =
            rand::seq::index::sample(&mut rng, m, cfg.ratings_per_user).into_vec();
        items.sort_unstable();
        for &item in &items {
            // class z ~ Cat(simplex)
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut z = k - 1;
            for (idx, &p) in simplex.iter().enumerate() {
                acc += p;
                if u <= acc {
                    z = idx;
                    break;
                }
            }
            class_draws[z] += 1;
            let noise: f64 = rng.sample(StandardNormal);
            let value = mu[z * m + item] + cfg.noise_sigma * noise;
            let raw = anchor_mean + value * anchor_std;
            let rating = math::round(raw).clamp(1.0, r as f64) as u32;
            triples.push(RatingTriple { user: user as UserId, item: item as ItemId, rating });
        }
        simplices.extend_from_slice(&simplex);
    }

    let user_labels = (0..cfg.users).map(|u| format!("u{u}")).collect();
    let item_labels = (0..m).map(|x| format!("i{x}")).collect();
    let dataset = Dataset::from_triples(triples, cfg.rating_scale, user_labels, item_labels)?;
    let truth = AspectModel::new(k, m, cfg.rating_scale, cfg.noise_sigma, mu, sigma, simplices)
        .expect("generator parameters are valid by construction");
    Ok(Synthetic { dataset, truth, class_draws })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::from_triples(
            vec![
                RatingTriple { user: 0, item: 0, rating: 1 },
                RatingTriple { user: 0, item: 1, rating: 3 },
                RatingTriple { user: 0, item: 2, rating: 5 },
                RatingTriple { user: 1, item: 0, rating: 4 },
                RatingTriple { user: 1, item: 2, rating: 4 },
            ],
            5,
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into(), "z".into()],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_triples() {
        let mk = |rating| {
            Dataset::from_triples(
                vec![RatingTriple { user: 0, item: 0, rating }],
                5,
                vec!["a".into()],
                vec!["x".into()],
            )
        };
        assert_eq!(
            mk(9).unwrap_err(),
            DatasetError::RatingOutOfScale { user: 0, item: 0, rating: 9, scale: 5 }
        );
        assert_eq!(mk(0).unwrap_err(), DatasetError::RatingOutOfScale {
            user: 0,
            item: 0,
            rating: 0,
            scale: 5
        });
        assert_eq!(
            Dataset::from_triples(vec![], 5, vec![], vec![]).unwrap_err(),
            DatasetError::Empty
        );
        let dup = Dataset::from_triples(
            vec![
                RatingTriple { user: 0, item: 0, rating: 2 },
                RatingTriple { user: 0, item: 0, rating: 3 },
            ],
            5,
            vec!["a".into()],
            vec!["x".into()],
        );
        assert_eq!(dup.unwrap_err(), DatasetError::DuplicatePair { user: 0, item: 0 });
    }

    #[test]
    fn normalization_matches_hand_computation() {
        // user 0 rated [1, 3, 5]: mean 3, population std sqrt(8/3)
        let ds = tiny();
        let norm = normalize(&ds);
        let s = norm.stats[0];
        assert!((s.mean - 3.0).abs() < 1e-12);
        assert!((s.std - 1.6329931618554518).abs() < 1e-9);
        let vals: Vec<f64> = ds
            .triples()
            .iter()
            .zip(&norm.values)
            .filter(|(t, _)| t.user == 0)
            .map(|(_, &v)| v)
            .collect();
        assert!((vals[0] + 1.224744871391589).abs() < 1e-9);
        assert!(vals[1].abs() < 1e-12);
        assert!((vals[2] - 1.224744871391589).abs() < 1e-9);
    }

    #[test]
    fn constant_rater_normalizes_to_zero() {
        let s = UserNormStats::from_ratings(&[4, 4]);
        assert_eq!(s.std, STD_FLOOR);
        assert_eq!(s.normalize(4.0), 0.0);
        let single = UserNormStats::from_ratings(&[2]);
        assert_eq!(single.normalize(2.0), 0.0);
    }

    #[test]
    fn normalization_round_trips() {
        let ds = tiny();
        let norm = normalize(&ds);
        for (t, &v) in ds.triples().iter().zip(&norm.values) {
            let back = norm.stats[t.user as usize].denormalize(v);
            assert!((back - t.rating as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn split_respects_counts_and_disjointness() {
        let synth = generate_synthetic(&SynthConfig {
            users: 30,
            ratings_per_user: 30,
            seed: 11,
            ..SynthConfig::default()
        })
        .unwrap();
        let split = split_protocol(&synth.dataset, 20, 3, 20, 99).unwrap();
        assert_eq!(split.train_users.len(), 20);
        assert_eq!(split.test_users.len(), 10);
        for tu in &split.test_users {
            assert_eq!(tu.seed_items.len(), 3);
            assert_eq!(tu.holdout.len(), 20);
            assert_eq!(tu.candidates.len(), 7);
            let mut all: Vec<ItemId> = tu
                .seed_items
                .iter()
                .chain(&tu.holdout)
                .chain(&tu.candidates)
                .map(|&(x, _)| x)
                .collect();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), 30, "seed/holdout/candidates must be disjoint");
            // every pair is one of the user's observed ratings
            let observed = synth.dataset.user_ratings(tu.user);
            for pair in tu.seed_items.iter().chain(&tu.holdout).chain(&tu.candidates) {
                assert!(observed.contains(pair));
            }
        }
    }

    #[test]
    fn split_excludes_short_users() {
        // users need 3 + 20 + 1 = 24 ratings; give them 23
        let synth = generate_synthetic(&SynthConfig {
            users: 10,
            ratings_per_user: 23,
            seed: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(
            split_protocol(&synth.dataset, 5, 3, 20, 7).unwrap_err(),
            DatasetError::NoEligibleTestUsers
        );
    }

    #[test]
    fn split_is_deterministic() {
        let synth = generate_synthetic(&SynthConfig { seed: 3, ..SynthConfig::default() }).unwrap();
        let a = split_protocol(&synth.dataset, 200, 3, 20, 42).unwrap();
        let b = split_protocol(&synth.dataset, 200, 3, 20, 42).unwrap();
        for (x, y) in a.test_users.iter().zip(&b.test_users) {
            assert_eq!(x.seed_items, y.seed_items);
            assert_eq!(x.holdout, y.holdout);
            assert_eq!(x.candidates, y.candidates);
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let cfg = SynthConfig { seed: 5, ..SynthConfig::default() };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.dataset.triples(), b.dataset.triples());
        assert_eq!(a.class_draws, b.class_draws);
    }

    #[test]
    fn synthetic_class_frequencies_match_simplices() {
        let cfg = SynthConfig { users: 200, seed: 17, ..SynthConfig::default() };
        let synth = generate_synthetic(&cfg).unwrap();
        let k = cfg.classes;
        let rpu = cfg.ratings_per_user as f64;
        for z in 0..k {
            let expected: f64 =
                (0..cfg.users).map(|u| rpu * synth.truth.user_simplex(u as UserId)[z]).sum();
            let var: f64 = (0..cfg.users)
                .map(|u| {
                    let p = synth.truth.user_simplex(u as UserId)[z];
                    rpu * p * (1.0 - p)
                })
                .sum();
            let dev = (synth.class_draws[z] as f64 - expected).abs();
            assert!(
                dev <= 3.0 * math::sqrt(var),
                "class {z}: count {} vs expected {expected:.1} (3 sigma = {:.1})",
                synth.class_draws[z],
                3.0 * math::sqrt(var)
            );
        }
    }

    #[test]
    fn single_class_synthetic_clusters_per_item() {
        // k=1, tiny noise: all normalized ratings for an item sit near mu_{1,x}
        let cfg = SynthConfig {
            classes: 1,
            users: 40,
            items: 10,
            ratings_per_user: 10,
            noise_sigma: 1e-3,
            seed: 23,
            ..SynthConfig::default()
        };
        let synth = generate_synthetic(&cfg).unwrap();
        let r = cfg.rating_scale;
        let anchor_mean = (1.0 + r as f64) / 2.0;
        let anchor_std = math::sqrt(((r * r - 1) as f64) / 12.0);
        for t in synth.dataset.triples() {
            let mu = synth.truth.mu(0, t.item);
            let expected = math::round(anchor_mean + mu * anchor_std).clamp(1.0, r as f64);
            assert_eq!(t.rating as f64, expected, "item {} should be deterministic", t.item);
        }
    }

    #[test]
    fn subset_of_users_renumbers() {
        let ds = tiny();
        let sub = ds.subset_of_users(&[1]).unwrap();
        assert_eq!(sub.num_users(), 1);
        assert_eq!(sub.num_items(), 3);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.user_label(0), "b");
    }
}
