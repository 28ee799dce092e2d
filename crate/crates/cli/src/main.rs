//! `elicit` — train the latent-class rating model, generate synthetic
//! benchmark data, run the simulated-elicitation experiment, and verify the
//! numerical machinery.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use elicit_core::dataset::{generate_synthetic, normalize, SynthConfig};
use elicit_core::model::{train_em, TrainConfig};
use elicit_core::verify;
use elicit_cli::config::{DataSource, ExperimentConfig, FileFormat};
use elicit_cli::experiment::{run_experiment, write_outputs};
use elicit_cli::loader::{load_dataset, save_dataset};
use elicit_cli::model_io::save_model;

#[derive(Parser)]
#[command(name = "elicit", version, about = "Active learning for collaborative filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FormatArgs {
    /// Field delimiter: tab, comma, space, semicolon, or a single character
    #[arg(long, default_value = "tab")]
    delimiter: String,
    /// Skip the first line of the input file
    #[arg(long)]
    header: bool,
    /// Rating scale upper bound R (ratings live in [1, R])
    #[arg(long, default_value_t = 5)]
    rating_scale: u32,
}

impl FormatArgs {
    fn file_format(&self) -> anyhow::Result<FileFormat> {
        let delimiter = match self.delimiter.as_str() {
            "tab" => '\t',
            "comma" => ',',
            "space" => ' ',
            "semicolon" => ';',
            s if s.chars().count() == 1 => s.chars().next().unwrap(),
            other => anyhow::bail!("unrecognized delimiter '{other}'"),
        };
        Ok(FileFormat { delimiter, has_header: self.header })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the aspect model on a rating file and serialize it
    Train {
        /// Rating triple file
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        /// Number of latent classes
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Train on the first N users only (default: all)
        #[arg(long)]
        train_users: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        em_max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        em_tol: f64,
        #[arg(long, default_value_t = 0.05)]
        sigma_floor: f64,
        /// Output model path
        #[arg(long, default_value = "model.txt")]
        out: PathBuf,
    },
    /// Generate a synthetic dataset plus its ground-truth model
    Synth {
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 300)]
        users: usize,
        #[arg(long, default_value_t = 50)]
        items: usize,
        #[arg(long, default_value_t = 30)]
        ratings_per_user: usize,
        #[arg(long, default_value_t = 5)]
        rating_scale: u32,
        #[arg(long, default_value_t = 0.3)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the rating triples (tab-delimited)
        #[arg(long, default_value = "synthetic.tsv")]
        out_data: PathBuf,
        /// Where to write the generating model
        #[arg(long)]
        out_model: Option<PathBuf>,
    },
    /// Run the simulated-elicitation experiment described by a config file
    Run {
        /// Flat key = value configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-candidate losses to losses.csv
        #[arg(long)]
        dump_losses: bool,
    },
    /// Run the numerical self-checks; exits non-zero if any fail
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Instances for the analytic-vs-MC loss comparison
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Monte-Carlo samples per instance
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Train {
            data,
            format,
            k,
            train_users,
            seed,
            em_max_iter,
            em_tol,
            sigma_floor,
            out,
        } => {
            let dataset = load_dataset(&data, &format.file_format()?, format.rating_scale)?;
            let dataset = match train_users {
                Some(n) if n < dataset.num_users() => {
                    let users: Vec<u32> = (0..n as u32).collect();
                    dataset.subset_of_users(&users)?
                }
                _ => dataset,
            };
            let norm = normalize(&dataset);
            let cfg = TrainConfig {
                k,
                max_iter: em_max_iter,
                loglik_tol: em_tol,
                sigma_floor,
                seed,
            };
            let outcome = train_em(&dataset, &norm, &cfg)?;
            println!(
                "trained K={k} on {} users / {} items in {} iterations (log-likelihood {:.3})",
                dataset.num_users(),
                dataset.num_items(),
                outcome.loglik.len(),
                outcome.loglik.last().unwrap()
            );
            save_model(&out, &outcome.model)?;
            println!("model written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            classes,
            users,
            items,
            ratings_per_user,
            rating_scale,
            noise_sigma,
            seed,
            out_data,
            out_model,
        } => {
            let synth = generate_synthetic(&SynthConfig {
                classes,
                users,
                items,
                ratings_per_user,
                rating_scale,
                noise_sigma,
                seed,
            })?;
            save_dataset(&out_data, &synth.dataset, '\t')?;
            println!(
                "wrote {} ratings ({} users x {} items) to {}",
                synth.dataset.len(),
                users,
                items,
                out_data.display()
            );
            if let Some(path) = out_model {
                save_model(&path, &synth.truth)?;
                println!("ground-truth model written to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, seed, out, dump_losses } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading config {}", path.display()))?;
                    ExperimentConfig::parse(&text)?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg.dump_losses |= dump_losses;
            if let DataSource::File { path } = &cfg.source {
                anyhow::ensure!(path.exists(), "dataset file {} does not exist", path.display());
            }
            let output = run_experiment(&cfg)?;
            let written = write_outputs(&cfg.out, &output)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            for row in &output.results.rows {
                println!(
                    "{:<20} round {}  MAE {:.4} +- {:.4}  ({} users)",
                    row.strategy.to_string(),
                    row.round,
                    row.mae_mean,
                    row.mae_stderr,
                    row.n_users
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { seed, instances, mc_samples } => {
            let mut all_ok = true;
            let mut report = |name: &str, passed: bool, detail: String| {
                println!("{}  {name}: {detail}", if passed { "PASS" } else { "FAIL" });
                all_ok &= passed;
            };

            let dg = verify::digamma_check();
            report("digamma", dg.passed, format!("max abs err {:.2e}", dg.max_abs_err));

            let dm = verify::dirichlet_moment_check(20, 200_000, seed);
            let worst_se =
                dm.trials.iter().map(|t| t.elog_max_se).fold(0.0f64, f64::max);
            report(
                "dirichlet moments",
                dm.passed,
                format!(
                    "mode identity err {:.2e} (tol 1e-6); E[ln theta] worst {:.2} se (tol 3)",
                    dm.max_mode_err, worst_se
                ),
            );

            let mc = verify::analytic_vs_mc_check(instances, mc_samples, seed);
            report(
                "analytic vs MC loss",
                mc.passed,
                format!("{}/{} within 3 se (need 95%)", mc.within, mc.trials.len()),
            );

            let fu = verify::fast_update_check(20, seed);
            let over = fu.trials.iter().filter(|t| t.tv > 0.05).count();
            report(
                "fast update vs re-fold",
                fu.passed,
                format!("max TV {:.3} (tol 0.05), {over}/20 over", fu.max_tv),
            );

            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
