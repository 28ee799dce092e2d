// Scratch probe for the ledger: where TV(fast, full) is large, how much
// worse does the fast update actually explain the enlarged revealed set?
use elicit_core::active::{fast_update, ActiveUserState, FoldConfig};
use elicit_core::dataset::{generate_synthetic, SynthConfig};
use elicit_core::math::splitmix64;
use elicit_core::model::rating_likelihood;

fn main() {
    let mut rows = Vec::new();
    for i in 0..100usize {
        let synth = generate_synthetic(&SynthConfig {
            classes: 2 + i % 3,
            users: 8,
            items: 40,
            ratings_per_user: 12,
            seed: splitmix64(0xFA57 ^ ((i as u64) << 8) ^ 3),
            ..SynthConfig::default()
        })
        .unwrap();
        let model = &synth.truth;
        let ratings = synth.dataset.user_ratings((i % 8) as u32);
        let n_rev = 3 + i % 6;
        let revealed: Vec<(u32, u32)> = ratings[..n_rev].to_vec();
        let (x, r) = ratings[n_rev];
        let state =
            ActiveUserState::from_revealed(model, revealed.clone(), &FoldConfig::default())
                .unwrap();
        let fast = fast_update(model, &state, x, r);
        let mut enlarged = revealed;
        enlarged.push((x, r));
        // same-stats oracle: exact MLE of the objective both updates share
        let full = {
            let k = model.k();
            let mut theta = vec![1.0 / k as f64; k];
            let table: Vec<Vec<f64>> = enlarged
                .iter()
                .map(|&(ix, ir)| {
                    (0..k)
                        .map(|z| rating_likelihood(model, z, ix, ir, &state.stats).unwrap())
                        .collect()
                })
                .collect();
            let n = enlarged.len() as f64;
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
                let delta = theta
                    .iter()
                    .zip(&next)
                    .map(|(&a, &b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                theta = next;
                if delta < 1e-13 {
                    break;
                }
            }
            theta
        };
        let tv = 0.5 * fast.iter().zip(&full).map(|(&a, &b)| (a - b).abs()).sum::<f64>();

        // enlarged-set log-likelihood at each point, holding the state's
        // stats fixed (the likelihood both updates actually compete on)
        let ll = |theta: &[f64]| -> f64 {
            enlarged
                .iter()
                .map(|&(ix, ir)| {
                    let mix: f64 = (0..model.k())
                        .map(|z| {
                            theta[z]
                                * rating_likelihood(model, z, ix, ir, &state.stats).unwrap()
                        })
                        .sum();
                    mix.ln()
                })
                .sum()
        };
        rows.push((tv, ll(&full) - ll(&fast), n_rev));
    }
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("worst 12 by TV:  (tv, ll(full)-ll(fast) in nats over N+1 obs, n_rev)");
    for r in rows.iter().take(12) {
        println!("  tv={:.4}  dll={:.4}  n={}", r.0, r.1, r.2);
    }
    let med_dll = {
        let mut d: Vec<f64> = rows.iter().map(|r| r.1).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d[d.len() / 2]
    };
    println!("median dll = {med_dll:.4} nats");
}
