//! Scalar numeric primitives shared across the crate.
//!
//! All transcendental functions go through `libm` so results are identical on
//! every platform, which keeps experiment outputs byte-for-byte reproducible.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// 1 / sqrt(2*pi)
const FRAC_1_SQRT_2PI: f64 = 0.39894228040143267794;

/// Densities are clamped away from zero so mixture responsibilities and
/// log-likelihoods stay finite even for extreme outliers.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Simplex coordinates returned by the fixed-point solvers are clamped to
/// this floor (and renormalized) so downstream `log` terms stay finite.
pub const SIMPLEX_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Gaussian density N(v; mu, sigma), floored at [`DENSITY_FLOOR`].
#[inline]
pub fn gaussian_pdf(v: f64, mu: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    let z = (v - mu) / sigma;
    let d = FRAC_1_SQRT_2PI / sigma * exp(-0.5 * z * z);
    d.max(DENSITY_FLOOR)
}

/// Digamma function, the logarithmic derivative of the gamma function.
///
/// Arguments below 10 are shifted up with the recurrence
/// `psi(x) = psi(x + 1) - 1/x`, then the asymptotic series is evaluated.
/// Absolute error is below 1e-12 over the positive reals.
///
/// Panics if `x <= 0`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires x > 0, got {x}");
    let mut shift = 0.0;
    let mut x = x;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // ln x - 1/2x - 1/12x^2 + 1/120x^4 - 1/252x^6 + 1/240x^8
    //      - 1/132x^10 + 691/32760x^12 - 1/12x^14
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    shift + ln(x) - 0.5 / x - series
}

/// Clamp simplex coordinates to [`SIMPLEX_FLOOR`] and renormalize to sum 1.
pub(crate) fn floor_and_normalize(theta: &mut [f64]) {
    let mut sum = 0.0;
    for t in theta.iter_mut() {
        if !(*t > SIMPLEX_FLOOR) {
            *t = SIMPLEX_FLOOR;
        }
        sum += *t;
    }
    for t in theta.iter_mut() {
        *t /= sum;
    }
}

/// Draw from a Dirichlet distribution by normalizing independent Gamma draws.
pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    if alpha.len() == 1 {
        return alloc::vec![1.0];
    }
    let mut draw: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("alpha > 0").sample(rng))
        .collect();
    let sum: f64 = draw.iter().sum();
    if sum > 0.0 {
        for v in &mut draw {
            *v /= sum;
        }
    } else {
        // all-zero underflow; fall back to uniform
        let u = 1.0 / alpha.len() as f64;
        draw.iter_mut().for_each(|v| *v = u);
    }
    draw
}

/// splitmix64 step; used to derive independent substreams from a master seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.5772156649015328606;

    #[test]
    fn digamma_known_values() {
        // psi(1) = -gamma, psi(2) = 1 - gamma, psi(0.5) = -gamma - 2 ln 2
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-12);
        assert!((digamma(2.0) - (1.0 - EULER_GAMMA)).abs() < 1e-12);
        assert!((digamma(0.5) - (-EULER_GAMMA - 2.0 * core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn digamma_recurrence() {
        for &x in &[0.1, 0.7, 1.3, 2.9, 7.5, 25.0, 1000.0] {
            let lhs = digamma(x + 1.0);
            let rhs = digamma(x) + 1.0 / x;
            assert!((lhs - rhs).abs() < 1e-12, "recurrence at {x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    #[should_panic]
    fn digamma_rejects_nonpositive() {
        digamma(0.0);
    }

    #[test]
    fn gaussian_peak_value() {
        let d = gaussian_pdf(0.0, 0.0, 0.5);
        assert!((d - 1.0 / (0.5 * sqrt(2.0 * core::f64::consts::PI))).abs() < 1e-12);
        // far tail still strictly positive
        assert!(gaussian_pdf(1e6, 0.0, 0.1) > 0.0);
    }

    #[test]
    fn dirichlet_sample_is_simplex() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let s = sample_dirichlet(&[1.5, 2.0, 3.5], &mut rng);
        assert_eq!(s.len(), 3);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.iter().all(|&v| v >= 0.0));
    }
}
