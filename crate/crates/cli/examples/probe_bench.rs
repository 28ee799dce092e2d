// Scratch probe: directional benchmark across 10 master seeds.
use elicit_cli::config::ExperimentConfig;
use elicit_cli::experiment::run_experiment;
use elicit_core::strategies::StrategyKind;

fn main() {
    let t0 = std::time::Instant::now();
    let mut wins_a = 0;
    let mut wins_b = 0;
    for master in 1u64..=10 {
        let cfg = ExperimentConfig {
            synth: elicit_core::dataset::SynthConfig {
                classes: 4,
                users: 300,
                items: 50,
                ratings_per_user: 30,
                noise_sigma: 0.3,
                ..Default::default()
            },
            train_users: 200,
            k: 4,
            seed: master,
            ..ExperimentConfig::default()
        };
        let out = run_experiment(&cfg).unwrap();
        let mae_at = |s: StrategyKind, round: usize| -> f64 {
            out.results
                .rows
                .iter()
                .find(|r| r.strategy == s && r.round == round)
                .unwrap()
                .mae_mean
        };
        let (rnd0, rnd5) = (mae_at(StrategyKind::Random, 0), mae_at(StrategyKind::Random, 5));
        let bay5 = mae_at(StrategyKind::Bayesian, 5);
        let me5 = mae_at(StrategyKind::ModelEntropy, 5);
        let pe5 = mae_at(StrategyKind::PredictionEntropy, 5);
        let a = bay5 <= rnd5;
        let b = me5 >= pe5;
        wins_a += a as u32;
        wins_b += b as u32;
        println!(
            "seed {master:2}: round0={rnd0:.4} | r5 random={rnd5:.4} bayes={bay5:.4} model={me5:.4} pred={pe5:.4} | a={a} b={b}"
        );
    }
    println!("(a) bayesian<=random in {wins_a}/10 (need 8); (b) model>=pred in {wins_b}/10 (need 7)");
    println!("total {:?}", t0.elapsed());
}
