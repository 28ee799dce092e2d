// Scratch probe: TV(fast_update, full re-fold with shared stats) as a
// function of the model's density sharpness.
use elicit_core::active::{fast_update, ActiveUserState, FoldConfig};
use elicit_core::dataset::UserNormStats;
use elicit_core::model::{rating_likelihood, AspectModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn fold_with_stats(
    model: &AspectModel,
    revealed: &[(u32, u32)],
    stats: &UserNormStats,
) -> Vec<f64> {
    let k = model.k();
    let mut theta = vec![1.0 / k as f64; k];
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

fn run(sig_lo: f64, sig_hi: f64, mu_range: f64, trials: usize, seed: u64) -> (f64, f64, usize) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut tvs = Vec::new();
    for i in 0..trials {
        let k = 2 + i % 3;
        let items = 12;
        let mu: Vec<f64> = (0..k * items).map(|_| rng.random_range(-mu_range..mu_range)).collect();
        let sigma: Vec<f64> = (0..k * items).map(|_| rng.random_range(sig_lo..sig_hi)).collect();
        let model = AspectModel::new(k, items, 5, 0.05, mu, sigma, vec![]).unwrap();
        let n_rev = 3 + i % 6;
        let mut ids: Vec<u32> = (0..items as u32).collect();
        use rand::seq::SliceRandom;
        ids.shuffle(&mut rng);
        let revealed: Vec<(u32, u32)> =
            ids.iter().take(n_rev).map(|&x| (x, rng.random_range(1..=5u32))).collect();
        let (x, r) = (ids[n_rev], rng.random_range(1..=5u32));
        let state =
            ActiveUserState::from_revealed(&model, revealed.clone(), &FoldConfig::default())
                .unwrap();
        let fast = fast_update(&model, &state, x, r);
        let mut enlarged = revealed;
        enlarged.push((x, r));
        let full = fold_with_stats(&model, &enlarged, &state.stats);
        let tv = 0.5 * fast.iter().zip(&full).map(|(&a, &b)| (a - b).abs()).sum::<f64>();
        tvs.push(tv);
    }
    tvs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let over = tvs.iter().filter(|&&t| t > 0.05).count();
    (tvs[tvs.len() / 2], tvs[tvs.len() - 1], over)
}

fn main() {
    for (lo, hi, mu) in [
        (0.3, 1.2, 1.5),
        (0.5, 1.2, 1.5),
        (0.6, 1.2, 1.2),
        (0.7, 1.3, 1.0),
    ] {
        for seed in [11u64, 77, 123] {
            let (med, max, over) = run(lo, hi, mu, 200, seed);
            println!(
                "sigma [{lo},{hi}] mu +-{mu} seed {seed}: median={med:.4} max={max:.4} over0.05={over}/200"
            );
        }
    }
}
