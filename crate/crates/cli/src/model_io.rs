//! Flat text serialization of a trained (or ground-truth) model.
//!
//! ```text
//! elicit-model v1
//! classes <K>
//! items <M>
//! rating_scale <R>
//! sigma_floor <f>
//! train_users <N>
//! gaussians
//! <z> <x> <mu> <sigma>        # K*M lines
//! simplices
//! <p_1> ... <p_K>             # N lines
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so load(save(m))
//! reproduces the model bit for bit.

use std::path::{Path, PathBuf};

use elicit_core::model::AspectModel;
use thiserror::Error;

const MAGIC: &str = "elicit-model v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("model invariant violated: {0}")]
    Invalid(#[from] elicit_core::error::ModelError),
}

pub fn model_to_string(model: &AspectModel) -> String {
    let k = model.k();
    let m = model.num_items();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("classes {k}\n"));
    out.push_str(&format!("items {m}\n"));
    out.push_str(&format!("rating_scale {}\n", model.rating_scale()));
    out.push_str(&format!("sigma_floor {}\n", model.sigma_floor()));
    out.push_str(&format!("train_users {}\n", model.num_train_users()));
    out.push_str("gaussians\n");
    for z in 0..k {
        for x in 0..m {
            out.push_str(&format!("{z} {x} {} {}\n", model.mu(z, x as u32), model.sigma(z, x as u32)));
        }
    }
    out.push_str("simplices\n");
    for u in 0..model.num_train_users() {
        let row = model.user_simplex(u as u32);
        let cells: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn model_from_string(text: &str) -> Result<AspectModel, ModelIoError> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, reason: &str| ModelIoError::Parse {
        line: line + 1,
        reason: reason.to_string(),
    };

    let (i, magic) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    if magic.trim() != MAGIC {
        return Err(parse_err(i, "missing 'elicit-model v1' header"));
    }

    let mut header = |name: &str| -> Result<String, ModelIoError> {
        let (i, line) = lines.next().ok_or_else(|| parse_err(usize::MAX - 1, "truncated header"))?;
        let (key, value) =
            line.split_once(' ').ok_or_else(|| parse_err(i, "expected '<key> <value>'"))?;
        if key != name {
            return Err(parse_err(i, &format!("expected '{name}', got '{key}'")));
        }
        Ok(value.trim().to_string())
    };
    let k: usize = header("classes")?.parse().map_err(|_| parse_err(1, "bad class count"))?;
    let m: usize = header("items")?.parse().map_err(|_| parse_err(2, "bad item count"))?;
    let rating_scale: u32 =
        header("rating_scale")?.parse().map_err(|_| parse_err(3, "bad rating scale"))?;
    let sigma_floor: f64 =
        header("sigma_floor")?.parse().map_err(|_| parse_err(4, "bad sigma floor"))?;
    let n_users: usize =
        header("train_users")?.parse().map_err(|_| parse_err(5, "bad train user count"))?;

    let (i, section) = lines.next().ok_or_else(|| parse_err(6, "missing gaussians section"))?;
    if section.trim() != "gaussians" {
        return Err(parse_err(i, "expected 'gaussians'"));
    }
    let mut mu = vec![0.0; k * m];
    let mut sigma = vec![0.0; k * m];
    for _ in 0..k * m {
        let (i, line) = lines.next().ok_or_else(|| parse_err(usize::MAX - 1, "truncated gaussian table"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(i, "expected '<z> <x> <mu> <sigma>'"));
        }
        let z: usize = fields[0].parse().map_err(|_| parse_err(i, "bad class index"))?;
        let x: usize = fields[1].parse().map_err(|_| parse_err(i, "bad item index"))?;
        if z >= k || x >= m {
            return Err(parse_err(i, "gaussian index out of range"));
        }
        mu[z * m + x] = fields[2].parse().map_err(|_| parse_err(i, "bad mu"))?;
        sigma[z * m + x] = fields[3].parse().map_err(|_| parse_err(i, "bad sigma"))?;
    }

    let (i, section) = lines.next().ok_or_else(|| parse_err(usize::MAX - 1, "missing simplices section"))?;
    if section.trim() != "simplices" {
        return Err(parse_err(i, "expected 'simplices'"));
    }
    let mut simplex = Vec::with_capacity(n_users * k);
    for _ in 0..n_users {
        let (i, line) = lines.next().ok_or_else(|| parse_err(usize::MAX - 1, "truncated simplex table"))?;
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let row = row.map_err(|_| parse_err(i, "bad simplex entry"))?;
        if row.len() != k {
            return Err(parse_err(i, &format!("expected {k} simplex entries, got {}", row.len())));
        }
        simplex.extend(row);
    }

    Ok(AspectModel::new(k, m, rating_scale, sigma_floor, mu, sigma, simplex)?)
}

pub fn save_model(path: &Path, model: &AspectModel) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_string(model))
        .map_err(|source| ModelIoError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<AspectModel, ModelIoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelIoError::Io { path: path.to_path_buf(), source })?;
    model_from_string(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use elicit_core::dataset::{generate_synthetic, normalize, SynthConfig};
    use elicit_core::model::{train_em, TrainConfig};

    #[test]
    fn round_trips_a_trained_model_exactly() {
        let synth = generate_synthetic(&SynthConfig {
            users: 30,
            items: 12,
            ratings_per_user: 8,
            seed: 5,
            ..SynthConfig::default()
        })
        .unwrap();
        let norm = normalize(&synth.dataset);
        let model = train_em(
            &synth.dataset,
            &norm,
            &TrainConfig { k: 3, seed: 9, ..TrainConfig::default() },
        )
        .unwrap()
        .model;

        let text = model_to_string(&model);
        let back = model_from_string(&text).unwrap();
        assert_eq!(model.k(), back.k());
        assert_eq!(model.num_items(), back.num_items());
        assert_eq!(model.rating_scale(), back.rating_scale());
        // bit-exact float round trip
        for (a, b) in model.mu_table().iter().zip(back.mu_table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in model.sigma_table().iter().zip(back.sigma_table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in model.simplex_table().iter().zip(back.simplex_table()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_corrupted_input() {
        assert!(model_from_string("").is_err());
        assert!(model_from_string("not-a-model\n").is_err());
        let truncated = "elicit-model v1\nclasses 2\nitems 1\nrating_scale 5\nsigma_floor 0.05\ntrain_users 0\ngaussians\n0 0 0.0 0.5\n";
        assert!(model_from_string(truncated).is_err());
    }
}
