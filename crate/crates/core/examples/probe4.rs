// Scratch probe: does fast_update find the argmax of its own MAP objective?
// Grid-search the Eq-15-style objective ln q(theta) + sum (a_z-1) ln theta_z
// for K=3 and compare with the fixed point.
use elicit_core::active::{fast_update, ActiveUserState, DirichletParams};
use elicit_core::dataset::UserNormStats;
use elicit_core::model::{rating_likelihood, AspectModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let k = 3;
        let items = 2;
        let mu: Vec<f64> = (0..k * items).map(|_| rng.random_range(-1.5..1.5)).collect();
        let sigma: Vec<f64> = (0..k * items).map(|_| rng.random_range(0.25..1.2)).collect();
        let model = AspectModel::new(k, items, 5, 0.05, mu, sigma, vec![]).unwrap();
        let alpha: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..7.0)).collect();
        let stats = UserNormStats { mean: 3.0, std: 1.2 };
        let state = ActiveUserState::from_alpha(DirichletParams::new(alpha.clone()).unwrap(), stats);
        let x = 0u32;
        let r = rng.random_range(1..=5u32);
        let fast = fast_update(&model, &state, x, r);

        let dens: Vec<f64> =
            (0..k).map(|z| rating_likelihood(&model, z, x, r, &stats).unwrap()).collect();
        let objective = |t: &[f64]| -> f64 {
            let q: f64 = dens.iter().zip(t).map(|(&d, &w)| d * w).sum();
            q.ln()
                + alpha
                    .iter()
                    .zip(t)
                    .map(|(&a, &w)| (a - 1.0) * w.max(1e-300).ln())
                    .sum::<f64>()
        };
        // dense grid over the 3-simplex, step 0.005
        let steps = 200usize;
        let mut best = f64::NEG_INFINITY;
        let mut best_t = [0.0; 3];
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let a = i as f64 / steps as f64;
                let b = j as f64 / steps as f64;
                let t = [a, b, 1.0 - a - b];
                let o = objective(&t);
                if o > best {
                    best = o;
                    best_t = t;
                }
            }
        }
        let max_gap = fast
            .iter()
            .zip(&best_t)
            .map(|(&f, &g)| (f - g).abs())
            .fold(0.0f64, f64::max);
        if max_gap > worst {
            worst = max_gap;
            if max_gap > 0.012 {
                println!(
                    "trial {trial}: gap {max_gap:.4} fast={fast:?} grid={best_t:?} alpha={alpha:?}"
                );
            }
        }
    }
    println!("worst per-coordinate gap vs grid argmax: {worst:.5} (grid step 0.005)");
}
