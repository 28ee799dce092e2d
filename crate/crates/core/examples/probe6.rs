// Scratch probe: warm-start vs cold-start full re-fold oracle on coherent
// (model-generated) session-like instances, truth and trained models.
use elicit_core::active::{fast_update, ActiveUserState, FoldConfig};
use elicit_core::dataset::{generate_synthetic, normalize, split_protocol, SynthConfig, UserNormStats};
use elicit_core::math::splitmix64;
use elicit_core::model::{rating_likelihood, train_em, AspectModel, TrainConfig};

fn fold_from(
    model: &AspectModel,
    revealed: &[(u32, u32)],
    stats: &UserNormStats,
    start: &[f64],
) -> Vec<f64> {
    let k = model.k();
    let mut theta: Vec<f64> = start.to_vec();
    // keep strictly interior so multiplicative updates can move every coord
    let floor = 1e-12;
    let s: f64 = theta.iter().map(|&t| t.max(floor)).sum();
    theta.iter_mut().for_each(|t| *t = t.max(floor) / s);
    let table: Vec<Vec<f64>> = revealed
        .iter()
        .map(|&(x, r)| (0..k).map(|z| rating_likelihood(model, z, x, r, stats).unwrap()).collect())
        .collect();
    let n = revealed.len() as f64;
    for _ in 0..200_000 {
        let mut next = vec![0.0; k];
        for row in &table {
            let mix: f64 = row.iter().zip(&theta).map(|(&p, &t)| p * t).sum();
            for z in 0..k {
                next[z] += row[z] * theta[z] / mix;
            }
        }
        next.iter_mut().for_each(|v| *v /= n);
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= sum);
        let delta =
            theta.iter().zip(&next).map(|(&a, &b)| (a - b).abs()).fold(0.0f64, f64::max);
        theta = next;
        if delta < 1e-12 {
            break;
        }
    }
    theta
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<f64>()
}

fn main() {
    for noise in [0.3f64, 0.6] {
        for use_trained in [false, true] {
            let mut warm_tvs = Vec::new();
            let mut cold_tvs = Vec::new();
            for i in 0..60usize {
                let synth = generate_synthetic(&SynthConfig {
                    users: 240,
                    noise_sigma: noise,
                    seed: splitmix64(0xACE ^ (i as u64)),
                    ..SynthConfig::default()
                })
                .unwrap();
                let model = if use_trained {
                    let split = split_protocol(&synth.dataset, 200, 3, 20, i as u64).unwrap();
                    let train = synth.dataset.subset_of_users(&split.train_users).unwrap();
                    let norm = normalize(&train);
                    train_em(&train, &norm, &TrainConfig { k: 4, seed: 1, ..Default::default() })
                        .unwrap()
                        .model
                } else {
                    synth.truth.clone()
                };
                let user = (200 + i % 40) as u32;
                let ratings = synth.dataset.user_ratings(user);
                let n_rev = 3 + i % 6;
                let revealed: Vec<(u32, u32)> = ratings[..n_rev].to_vec();
                let (x, r) = ratings[n_rev];
                let state = ActiveUserState::from_revealed(
                    &model,
                    revealed.clone(),
                    &FoldConfig::default(),
                )
                .unwrap();
                let fast = fast_update(&model, &state, x, r);
                let mut enlarged = revealed;
                enlarged.push((x, r));
                let warm = fold_from(&model, &enlarged, &state.stats, &state.theta_star);
                let uniform = vec![1.0 / model.k() as f64; model.k()];
                let cold = fold_from(&model, &enlarged, &state.stats, &uniform);
                warm_tvs.push(tv(&fast, &warm));
                cold_tvs.push(tv(&fast, &cold));
            }
            warm_tvs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cold_tvs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let p = |v: &Vec<f64>| {
                (v[v.len() / 2], v[v.len() * 9 / 10], v[v.len() - 1])
            };
            let (wm, w9, wx) = p(&warm_tvs);
            let (cm, c9, cx) = p(&cold_tvs);
            println!(
                "noise={noise} trained={use_trained}: warm med/p90/max = {wm:.4}/{w9:.4}/{wx:.4} | cold = {cm:.4}/{c9:.4}/{cx:.4}"
            );
        }
    }
}
