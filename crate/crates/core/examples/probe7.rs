// Scratch probe: TV in the realistic-noise regime (sigma near 1, coherent
// ratings drawn from the generative process), by revealed count.
use elicit_core::active::{fast_update, ActiveUserState, FoldConfig};
use elicit_core::dataset::{generate_synthetic, SynthConfig};
use elicit_core::math::splitmix64;
use elicit_core::model::rating_likelihood;

fn fold_with_stats(
    model: &elicit_core::AspectModel,
    revealed: &[(u32, u32)],
    stats: &elicit_core::dataset::UserNormStats,
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

fn main() {
    for noise in [0.8f64, 1.0, 1.2] {
        let mut by_n: Vec<Vec<f64>> = vec![Vec::new(); 9];
        let mut all = Vec::new();
        for i in 0..300usize {
            let synth = generate_synthetic(&SynthConfig {
                classes: 2 + i % 3,
                users: 10,
                items: 40,
                ratings_per_user: 12,
                noise_sigma: noise,
                seed: splitmix64(0xBEE5 ^ ((i as u64) << 4) ^ (noise * 10.0) as u64),
                ..SynthConfig::default()
            })
            .unwrap();
            let model = &synth.truth;
            let user = (i % 10) as u32;
            let ratings = synth.dataset.user_ratings(user);
            let n_rev = 3 + i % 6;
            let revealed: Vec<(u32, u32)> = ratings[..n_rev].to_vec();
            let (x, r) = ratings[n_rev];
            let state =
                ActiveUserState::from_revealed(model, revealed.clone(), &FoldConfig::default())
                    .unwrap();
            let fast = fast_update(model, &state, x, r);
            let mut enlarged = revealed;
            enlarged.push((x, r));
            let full = fold_with_stats(model, &enlarged, &state.stats);
            let tv = 0.5 * fast.iter().zip(&full).map(|(&a, &b)| (a - b).abs()).sum::<f64>();
            by_n[n_rev].push(tv);
            all.push(tv);
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let over = all.iter().filter(|&&t| t > 0.05).count();
        println!(
            "noise={noise}: med={:.4} p90={:.4} p99={:.4} max={:.4} over0.05={over}/300",
            all[all.len() / 2],
            all[all.len() * 9 / 10],
            all[all.len() * 99 / 100],
            all[all.len() - 1]
        );
        for n in 3..=8 {
            let mut v = by_n[n].clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!("   n={n}: max={:.4} (50 trials)", v[v.len() - 1]);
        }
    }
}
