// Scratch probe: TV of fast_update vs full re-fold against a TRAINED model,
// with the density table held at the state's stats for both sides.
use elicit_core::active::{fast_update, ActiveUserState, FoldConfig};
use elicit_core::dataset::{generate_synthetic, normalize, split_protocol, SynthConfig};
use elicit_core::model::{rating_likelihood, train_em, TrainConfig};

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<f64>()
}

fn fold_with_stats(
    model: &elicit_core::AspectModel,
    revealed: &[(u32, u32)],
    stats: &elicit_core::dataset::UserNormStats,
) -> Vec<f64> {
    let k = model.k();
    let mut theta = vec![1.0 / k as f64; k];
    let table: Vec<Vec<f64>> = revealed
        .iter()
        .map(|&(x, r)| {
            (0..k).map(|z| rating_likelihood(model, z, x, r, stats).unwrap()).collect()
        })
        .collect();
    let n = revealed.len() as f64;
    for _ in 0..100_000 {
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
        let delta = theta
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        theta = next;
        if delta < 1e-12 {
            break;
        }
    }
    theta
}

fn main() {
    for master in [1u64, 2, 3] {
        let synth = generate_synthetic(&SynthConfig {
            users: 260,
            seed: master,
            ..SynthConfig::default()
        })
        .unwrap();
        let split = split_protocol(&synth.dataset, 200, 3, 20, master).unwrap();
        let train = synth.dataset.subset_of_users(&split.train_users).unwrap();
        let norm = normalize(&train);
        let model = train_em(&train, &norm, &TrainConfig { k: 4, seed: master, ..Default::default() })
            .unwrap()
            .model;
        let sig: Vec<f64> = model.sigma_table().to_vec();
        let smin = sig.iter().cloned().fold(f64::INFINITY, f64::min);
        let smed = {
            let mut s = sig.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s[s.len() / 2]
        };
        println!("master={master}: trained sigma min={smin:.3} median={smed:.3}");

        let mut tvs: Vec<f64> = Vec::new();
        for (i, tu) in split.test_users.iter().enumerate().take(40) {
            let n_rev = 3 + i % 6;
            let mut revealed = tu.seed_items.clone();
            revealed.extend(tu.candidates.iter().take(n_rev - 3 + 1).cloned());
            let (x, r) = revealed.pop().unwrap();
            let state = ActiveUserState::from_revealed(&model, revealed.clone(), &FoldConfig::default())
                .unwrap();
            let fast = fast_update(&model, &state, x, r);
            let mut enlarged = revealed.clone();
            enlarged.push((x, r));
            let full = fold_with_stats(&model, &enlarged, &state.stats);
            tvs.push(tv(&fast, &full));
        }
        tvs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "  tv: median={:.4} p90={:.4} max={:.4}  (n={})",
            tvs[tvs.len() / 2],
            tvs[tvs.len() * 9 / 10],
            tvs[tvs.len() - 1],
            tvs.len()
        );
    }
}
