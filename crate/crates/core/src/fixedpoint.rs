//! Fixed-point analysis of a bipartite purification map on diagonal states.
//!
//! The state of a D x D bipartite system (D a power of two, so each half is a
//! register of qubits) is a matrix of nonnegative weights lambda[k][j]. One
//! round of the map convolves every column with itself over the cyclic group
//! Z_D and renormalizes; n rounds therefore raise each column's discrete
//! Fourier spectrum to the power 2^n:
//!
//!   lambda'[k][j]  ~  sum over k' of  omega^(k k') * F_j(k')^(2^n),
//!   F_j(k')        =  sum over k  of  omega^(-k k') * lambda[k][j],
//!
//! with omega = exp(2 pi i / D). The forward and inverse transforms must be a
//! true DFT pair (opposite phase signs); using the same sign twice silently
//! breaks the semigroup property iterate(m, a+b) = iterate(iterate(m, a), b).
//!
//! Spectra are scaled to unit peak before powering and tracked in the log
//! domain, so rounds up to n = 20 and beyond neither overflow nor lose the
//! relative scale between columns.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Weights must sum to 1 within this tolerance for a normalized constructor.
const NORM_TOL: f64 = 1e-12;

/// Relative imaginary residue above this threshold signals a transform fault
/// (the map preserves real nonnegative matrices in exact arithmetic).
const RESIDUE_TOL: f64 = 1e-8;

/// Rounds accepted by the closed form; the iterated map takes any count.
pub const MAX_CLOSED_FORM_ROUNDS: u32 = 20;

/// Diagonal-weight matrix of a D x D bipartite system, row-major:
/// `lambda[k * d + j]` is the weight of row k, column j. D is a power of two
/// at least 2, so the system is a pair of qubit registers with D = 2^(N/2).
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteDiag {
    d: usize,
    lambda: Vec<f64>,
}

fn validate_dim(d: usize) -> Result<()> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Invalid(format!(
            "bipartite dimension must be a power of two >= 2, got {d}"
        )));
    }
    if d > 1 << 12 {
        return Err(Error::Invalid(format!("bipartite dimension {d} too large")));
    }
    Ok(())
}

impl BipartiteDiag {
    /// Normalized weights; the sum must be 1 within 1e-12.
    pub fn new(d: usize, lambda: Vec<f64>) -> Result<Self> {
        validate_dim(d)?;
        if lambda.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} weights, got {}",
                d * d,
                lambda.len()
            )));
        }
        if lambda.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Invalid("weights must be finite and >= 0".into()));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::ZeroNorm);
        }
        Ok(BipartiteDiag { d, lambda })
    }

    /// Normalize arbitrary nonnegative weights.
    pub fn from_unnormalized(d: usize, lambda: Vec<f64>) -> Result<Self> {
        validate_dim(d)?;
        if lambda.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} weights, got {}",
                d * d,
                lambda.len()
            )));
        }
        if lambda.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Invalid("weights must be finite and >= 0".into()));
        }
        let sum: f64 = lambda.iter().sum();
        if sum <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let lambda = lambda.into_iter().map(|w| w / sum).collect();
        Ok(BipartiteDiag { d, lambda })
    }

    /// Uniform background with one enhanced element at the origin:
    /// lambda[k][j] = (1 + x when k = j = 0) / (D^2 + x). This is the shape a
    /// globally depolarized state takes after splitting into two halves.
    pub fn from_global_noise(d: usize, x: f64) -> Result<Self> {
        validate_dim(d)?;
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Invalid(format!("noise weight x must be >= 0, got {x}")));
        }
        let mut lambda = vec![1.0; d * d];
        lambda[0] += x;
        Self::from_unnormalized(d, lambda)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Total qubit count N with D = 2^(N/2).
    pub fn qubits(&self) -> usize {
        2 * self.d.trailing_zeros() as usize
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn entry(&self, k: usize, j: usize) -> f64 {
        self.lambda[k * self.d + j]
    }

    /// The origin weight, the quantity the closed form tracks.
    pub fn lambda00(&self) -> f64 {
        self.lambda[0]
    }
}

/// Apply `n_rounds` rounds of the column-convolution map.
///
/// Zero rounds return the input unchanged. Each column's spectrum is scaled
/// to unit peak, squared `n_rounds` times, transformed back, and the
/// per-column log scales are recombined before the global renormalization.
/// A relative imaginary residue above 1e-8 reports a transform fault; the
/// residue of a healthy run sits near machine precision and is discarded.
pub fn iterate_map(m: &BipartiteDiag, n_rounds: u32) -> Result<BipartiteDiag> {
    if n_rounds == 0 {
        return Ok(m.clone());
    }
    let d = m.d;
    let df = d as f64;
    let phase = |k: usize, sign: f64| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / df);

    let mut columns: Vec<(Vec<Complex64>, f64)> = Vec::with_capacity(d);
    for j in 0..d {
        let mut spectrum: Vec<Complex64> = (0..d)
            .map(|kp| {
                (0..d)
                    .map(|k| phase(k * kp % d, -1.0) * m.lambda[k * d + j])
                    .sum()
            })
            .collect();
        let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            columns.push((vec![Complex64::new(0.0, 0.0); d], f64::NEG_INFINITY));
            continue;
        }
        for z in spectrum.iter_mut() {
            *z /= peak;
        }
        for _ in 0..n_rounds {
            for z in spectrum.iter_mut() {
                *z *= *z;
            }
        }
        let back: Vec<Complex64> = (0..d)
            .map(|k| {
                spectrum
                    .iter()
                    .enumerate()
                    .map(|(kp, &z)| z * phase(k * kp % d, 1.0))
                    .sum::<Complex64>()
                    / df
            })
            .collect();
        columns.push((back, 2f64.powi(n_rounds as i32) * peak.ln()));
    }

    let log_max = columns
        .iter()
        .map(|(_, scale)| *scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if log_max == f64::NEG_INFINITY {
        return Err(Error::ZeroNorm);
    }
    let mut out = vec![0.0; d * d];
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for (j, (values, scale)) in columns.iter().enumerate() {
        let weight = if scale.is_finite() {
            (scale - log_max).exp()
        } else {
            0.0
        };
        for k in 0..d {
            let z = values[k] * weight;
            max_re = max_re.max(z.re.abs());
            max_im = max_im.max(z.im.abs());
            out[k * d + j] = z.re.max(0.0);
        }
    }
    if max_re <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    if max_im > RESIDUE_TOL * max_re {
        return Err(Error::ImaginaryResidue(max_im / max_re));
    }
    BipartiteDiag::from_unnormalized(d, out)
}

/// Closed form for the origin weight after n rounds, starting from
/// [`BipartiteDiag::from_global_noise`]:
///
///   lambda00(n) = ((x+D)^(2^n) + (D-1) x^(2^n))
///               / (D ((x+D)^(2^n) + (D-1) D^(2^n))).
///
/// Evaluated in the log domain so the 2^n exponents never overflow; x = D
/// yields exactly 1/D for every n, and x = 0 yields exactly 1/D^2.
pub fn closed_form_lambda00(d: usize, x: f64, n: u32) -> Result<f64> {
    validate_dim(d)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Invalid(format!("noise weight x must be >= 0, got {x}")));
    }
    if n > MAX_CLOSED_FORM_ROUNDS {
        return Err(Error::Invalid(format!(
            "closed form supports up to {MAX_CLOSED_FORM_ROUNDS} rounds, got {n}"
        )));
    }
    let df = d as f64;
    let e = 2f64.powi(n as i32);
    // Divide through by (x+D)^(2^n): both remaining power ratios are <= 1,
    // so their log-domain exponents are small or negative and the whole
    // expression stays at full f64 precision for every round count.
    let t_num = (df - 1.0) * (e * (x / (x + df)).ln()).exp();
    let t_den = (df - 1.0) * (e * (df / (x + df)).ln()).exp();
    Ok((1.0 + t_num) / (df * (1.0 + t_den)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn one_round_from_enhanced_origin_is_five_thirteenths() {
        let m = BipartiteDiag::from_global_noise(2, 1.0).unwrap();
        assert!((m.lambda00() - 0.4).abs() < 1e-15);
        let next = iterate_map(&m, 1).unwrap();
        assert!((next.lambda00() - 5.0 / 13.0).abs() < 1e-14);
        let closed = closed_form_lambda00(2, 1.0, 1).unwrap();
        assert!((closed - 5.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn balanced_weight_pins_origin_at_one_over_d() {
        for d in [2usize, 4, 8, 16] {
            for n in 0..=20 {
                let v = closed_form_lambda00(d, d as f64, n).unwrap();
                assert!(
                    (v - 1.0 / d as f64).abs() < 1e-15,
                    "d={d} n={n} v={v}"
                );
            }
        }
    }

    #[test]
    fn zero_weight_pins_origin_at_uniform() {
        for d in [2usize, 4, 8] {
            for n in 0..=20 {
                let v = closed_form_lambda00(d, 0.0, n).unwrap();
                assert!((v - 1.0 / (d * d) as f64).abs() < 1e-15, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn zero_rounds_is_identity() {
        let m = BipartiteDiag::from_global_noise(4, 3.0).unwrap();
        let same = iterate_map(&m, 0).unwrap();
        assert_eq!(m, same);
        let v = closed_form_lambda00(4, 3.0, 0).unwrap();
        assert!((v - 4.0 / 19.0).abs() < 1e-15, "matches (x+1)/(d^2+x)");
    }

    #[test]
    fn iterated_origin_matches_closed_form() {
        for d in [2usize, 4, 8] {
            for &x in &[0.0, 0.5, 1.0, 2.0, 7.0] {
                let m = BipartiteDiag::from_global_noise(d, x).unwrap();
                for n in 0..=6 {
                    let iterated = iterate_map(&m, n).unwrap().lambda00();
                    let closed = closed_form_lambda00(d, x, n).unwrap();
                    assert!(
                        (iterated - closed).abs() < 1e-10,
                        "d={d} x={x} n={n}: {iterated} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn map_iteration_is_a_semigroup() {
        let mut rng = StdRng::seed_from_u64(7);
        let d = 4;
        let lambda: Vec<f64> = (0..d * d).map(|_| rng.gen_range(0.01..1.0)).collect();
        let m = BipartiteDiag::from_unnormalized(d, lambda).unwrap();
        let direct = iterate_map(&m, 5).unwrap();
        let staged = iterate_map(&iterate_map(&m, 2).unwrap(), 3).unwrap();
        for (a, b) in direct.lambda().iter().zip(staged.lambda()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn deep_iteration_converges_to_one_over_d() {
        for d in [2usize, 4] {
            for &x in &[0.5, 1.0, 3.0] {
                let m = BipartiteDiag::from_global_noise(d, x).unwrap();
                let deep = iterate_map(&m, 20).unwrap();
                assert!(
                    (deep.lambda00() - 1.0 / d as f64).abs() < 1e-12,
                    "d={d} x={x}"
                );
                let closed = closed_form_lambda00(d, x, 20).unwrap();
                assert!((closed - 1.0 / d as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_must_be_a_qubit_register_pair() {
        assert!(BipartiteDiag::from_global_noise(3, 1.0).is_err());
        assert!(BipartiteDiag::from_global_noise(1, 1.0).is_err());
        assert!(BipartiteDiag::new(2, vec![0.5; 3]).is_err());
        assert!(BipartiteDiag::new(2, vec![0.5, 0.5, 0.1, -0.1]).is_err());
        let m = BipartiteDiag::from_global_noise(4, 0.0).unwrap();
        assert_eq!(m.qubits(), 4);
        assert_eq!(m.d(), 4);
    }
}
