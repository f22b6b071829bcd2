//! Valence bond example: a three-site chain built from two maximally
//! entangled qubit pairs joined by a local projector.
//!
//! The projector P = sum over i, j, k of alpha[j, ik] |j><i|<k| consumes the
//! inner qubit of each pair and emits one site. Collecting the coefficients
//! as 2x2 matrices alpha^k with <j|alpha^k|i> = alpha[j, ik], the chain state
//! has amplitudes psi[a, j, b] = alpha[j, ab].
//!
//! Measuring sites in the Z basis collapses the chain to a single pair, which
//! standard two-qubit recurrence methods can purify; the purified pairs are
//! then glued back with a second projector Q = sum beta[j, ik] |j><i|<k|.
//! Gluing reproduces the original state exactly, even in the presence of
//! Z noise on the measured sites, iff
//!
//!   (1) beta^b alpha^0 = alpha^b         (the clean branch reconstructs),
//!   (2) beta^b Z alpha^0 = Z alpha^b     (Z noise commutes through),
//!
//! which for invertible alpha^0 reduces to the commutator condition
//! [beta^b, Z] alpha^0 = 0 with beta^b = alpha^b (alpha^0)^(-1).
//!
//! Amplitude indexing in this module reads kets left to right: the leftmost
//! site is the most significant bit, so psi[a, j, b] sits at index a*4+j*2+b.

use num_complex::Complex64;

use crate::{Error, Result};

/// 2x2 complex matrix, row major: m[row][col].
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pauli Z on one qubit.
const Z_MAT: Mat2 = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
];

/// Proportionality and commutator tests use this tolerance, relative to the
/// scale of the matrices involved.
const ALGEBRA_TOL: f64 = 1e-10;

fn mmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn msub(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][c] - b[r][c];
        }
    }
    out
}

fn frobenius(m: &Mat2) -> f64 {
    m.iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inv2(m: &Mat2) -> Option<Mat2> {
    let det = det2(m);
    if det.norm() <= 1e-12 * frobenius(m).powi(2).max(1e-300) {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Projector coefficients: `alpha[k][j][i]` holds alpha[j, ik], the weight
/// sending input pair |i>|k> to output site |j>.
#[derive(Clone, Debug)]
pub struct ValenceProjector {
    alpha: [Mat2; 2],
}

impl ValenceProjector {
    pub fn new(alpha0: Mat2, alpha1: Mat2) -> Result<Self> {
        let p = ValenceProjector {
            alpha: [alpha0, alpha1],
        };
        if p.scale() == 0.0 {
            return Err(Error::Invalid("projector has all-zero coefficients".into()));
        }
        Ok(p)
    }

    /// Coefficients laid out as the 2x4 display table: `rows[j][2*i + k]`
    /// is alpha[j, ik].
    pub fn from_rows(rows: &[[Complex64; 4]; 2]) -> Result<Self> {
        let mut alpha = [[[ZERO; 2]; 2]; 2];
        for (j, row) in rows.iter().enumerate() {
            for i in 0..2 {
                for k in 0..2 {
                    alpha[k][j][i] = row[2 * i + k];
                }
            }
        }
        ValenceProjector::new(alpha[0], alpha[1])
    }

    pub fn alpha(&self, k: usize) -> &Mat2 {
        &self.alpha[k]
    }

    fn scale(&self) -> f64 {
        self.alpha
            .iter()
            .map(frobenius)
            .fold(0.0, f64::max)
    }
}

/// Dense pure state on `n` qubits; the leftmost site is the most significant
/// bit of the amplitude index.
#[derive(Clone, Debug)]
pub struct PureState {
    n: usize,
    amp: Vec<Complex64>,
}

impl PureState {
    pub fn new(n: usize, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amp.len()
            )));
        }
        let norm_sq: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let norm = norm_sq.sqrt();
        let amp = amp.into_iter().map(|z| z / norm).collect();
        Ok(PureState { n, amp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amp(&self) -> &[Complex64] {
        &self.amp
    }

    /// Squared overlap |<self|other>|^2; both states are kept normalized.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "states on {} and {} qubits",
                self.n, other.n
            )));
        }
        let ip: Complex64 = self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(ip.norm_sqr())
    }
}

/// The three-site chain state psi[a, j, b] = alpha[j, ab], normalized.
pub fn build_initial(p: &ValenceProjector) -> Result<PureState> {
    let mut amp = vec![ZERO; 8];
    for a in 0..2 {
        for j in 0..2 {
            for b in 0..2 {
                amp[a * 4 + j * 2 + b] = p.alpha[b][j][a];
            }
        }
    }
    PureState::new(3, amp)
}

/// The three-qubit linear cluster state (controlled-Z between neighbors on
/// |+++>), in the same indexing convention.
pub fn cluster_state_3() -> PureState {
    let amp = (0..8usize)
        .map(|idx| {
            let (a, j, b) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            // Sign is the parity of a*j + j*b, the two controlled-Z phases.
            let parity = (a & j) ^ (j & b);
            Complex64::new(1.0 - 2.0 * parity as f64, 0.0)
        })
        .collect();
    PureState::new(3, amp).expect("cluster amplitudes are nonzero")
}

/// Outcome of projecting the first site of the chain onto <0|.
#[derive(Clone, Debug)]
pub struct PairReport {
    /// The surviving two-site state (middle site is the most significant bit).
    pub state: PureState,
    /// Largest Schmidt coefficient of the pair; 1 means product state.
    pub largest_schmidt: f64,
    pub separable: bool,
}

/// Project the first site of [`build_initial`] onto <0| and report the
/// entanglement of the surviving pair. The surviving amplitudes form the
/// matrix M[j][b] = alpha[j, 0b], i.e. the first columns of alpha^0 and
/// alpha^1 side by side; the pair is separable iff that matrix has rank 1,
/// which is what happens when alpha^1 = alpha^0.
pub fn z_measure_pair(p: &ValenceProjector) -> Result<PairReport> {
    let mut m = [[ZERO; 2]; 2];
    for j in 0..2 {
        for b in 0..2 {
            m[j][b] = p.alpha[b][j][0];
        }
    }
    let norm_sq: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    if norm_sq <= 1e-24 * p.scale().powi(2) {
        return Err(Error::ZeroProbability);
    }
    let amp = vec![m[0][0], m[0][1], m[1][0], m[1][1]];
    let state = PureState::new(2, amp)?;
    // Squared singular values of the normalized amplitude matrix solve
    // s^2 (1 - s^2) = |det|^2 because the trace of M M^H is 1.
    let det = det2(&m) / norm_sq;
    let disc = (1.0 - 4.0 * det.norm_sqr()).max(0.0).sqrt();
    let largest_schmidt = ((1.0 + disc) / 2.0).sqrt();
    Ok(PairReport {
        state,
        largest_schmidt,
        separable: largest_schmidt > 1.0 - ALGEBRA_TOL,
    })
}

/// Gluing coefficients beta^k = alpha^k (alpha^0)^(-1); beta^0 is the
/// identity by construction. Fails with [`Error::SingularMatrix`] when
/// alpha^0 is not invertible.
pub fn beta_from_alpha(p: &ValenceProjector) -> Result<[Mat2; 2]> {
    let inv = inv2(&p.alpha[0]).ok_or(Error::SingularMatrix)?;
    Ok([mmul(&p.alpha[0], &inv), mmul(&p.alpha[1], &inv)])
}

/// Stack the clean and Z-noise conditions as one linear system
/// beta [A | Z A] = [B | Z B] and solve it in the least-squares sense.
/// Returns the minimizer and its residual (Frobenius norm of the defect).
fn glue_solve(a: &Mat2, b: &Mat2) -> (Mat2, f64) {
    let za = mmul(&Z_MAT, a);
    let zb = mmul(&Z_MAT, b);
    let a_cols: [[Complex64; 2]; 4] = [
        [a[0][0], a[1][0]],
        [a[0][1], a[1][1]],
        [za[0][0], za[1][0]],
        [za[0][1], za[1][1]],
    ];
    let b_cols: [[Complex64; 2]; 4] = [
        [b[0][0], b[1][0]],
        [b[0][1], b[1][1]],
        [zb[0][0], zb[1][0]],
        [zb[0][1], zb[1][1]],
    ];
    // Normal equations: beta (A A^H) = B A^H, with A A^H pseudo-inverted.
    let mut h = [[ZERO; 2]; 2];
    let mut bah = [[ZERO; 2]; 2];
    for col in 0..4 {
        for r in 0..2 {
            for c in 0..2 {
                h[r][c] += a_cols[col][r] * a_cols[col][c].conj();
                bah[r][c] += b_cols[col][r] * a_cols[col][c].conj();
            }
        }
    }
    let beta = mmul(&bah, &pinv_hermitian(&h));
    let mut defect_sq = 0.0;
    for col in 0..4 {
        for r in 0..2 {
            let fit = beta[r][0] * a_cols[col][0] + beta[r][1] * a_cols[col][1];
            defect_sq += (fit - b_cols[col][r]).norm_sqr();
        }
    }
    (beta, defect_sq.sqrt())
}

/// Moore-Penrose inverse of a 2x2 Hermitian positive semidefinite matrix via
/// its closed-form eigendecomposition.
fn pinv_hermitian(h: &Mat2) -> Mat2 {
    let (h00, h11) = (h[0][0].re, h[1][1].re);
    let off = h[0][1];
    let mut out = [[ZERO; 2]; 2];
    let scale = h00.abs().max(h11.abs()).max(1e-300);
    if off.norm() <= 1e-14 * scale {
        // Numerically diagonal; invert the diagonal directly (the
        // eigenvector formula below degenerates when off vanishes).
        let cutoff = 1e-12 * h00.max(h11).max(0.0);
        if h00 > cutoff {
            out[0][0] = Complex64::new(1.0 / h00, 0.0);
        }
        if h11 > cutoff {
            out[1][1] = Complex64::new(1.0 / h11, 0.0);
        }
        return out;
    }
    let trace = h00 + h11;
    let disc = ((h00 - h11).powi(2) + 4.0 * off.norm_sqr()).sqrt();
    let eigs = [(trace + disc) / 2.0, (trace - disc) / 2.0];
    let cutoff = 1e-12 * eigs[0].max(0.0);
    for &lam in &eigs {
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        // disc >= 2|off| > 0 here, so the eigenvalues are distinct and the
        // eigenvector (off, lam - h00) never vanishes.
        let v = [off, Complex64::new(lam - h00, 0.0)];
        let nsq = v[0].norm_sqr() + v[1].norm_sqr();
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += v[r] * v[c].conj() / (lam * nsq);
            }
        }
    }
    out
}

/// Whether purify-then-glue is lossless for this projector: there must exist
/// gluing coefficients satisfying both the clean-branch and the Z-noise
/// conditions. With invertible alpha^0 this is the commutator test
/// [beta^b, Z] alpha^0 = 0 for beta from [`beta_from_alpha`]; otherwise the
/// stacked system is solved directly and judged by its residual.
pub fn optimality_condition(p: &ValenceProjector) -> Result<bool> {
    let scale = p.scale();
    if let Ok(betas) = beta_from_alpha(p) {
        let ok = betas.iter().all(|beta| {
            let comm = msub(&mmul(beta, &Z_MAT), &mmul(&Z_MAT, beta));
            frobenius(&mmul(&comm, &p.alpha[0])) <= ALGEBRA_TOL * scale.max(1.0)
        });
        return Ok(ok);
    }
    let ok = (0..2).all(|b| {
        let (_, defect) = glue_solve(&p.alpha[0], &p.alpha[b]);
        defect <= ALGEBRA_TOL * scale.max(1.0)
    });
    Ok(ok)
}

/// The gluing projector whose coefficients best satisfy both reconstruction
/// conditions: beta^k = alpha^k (alpha^0)^(-1) when alpha^0 is invertible,
/// the stacked least-squares solution otherwise.
pub fn reconstruction_projector(p: &ValenceProjector) -> Result<ValenceProjector> {
    let betas = match beta_from_alpha(p) {
        Ok(betas) => betas,
        Err(Error::SingularMatrix) => {
            let b0 = glue_solve(&p.alpha[0], &p.alpha[0]).0;
            let b1 = glue_solve(&p.alpha[0], &p.alpha[1]).0;
            [b0, b1]
        }
        Err(e) => return Err(e),
    };
    ValenceProjector::new(betas[0], betas[1])
}

/// Verify by explicit tensor contraction that gluing `q` onto the purified
/// pair reproduces the chain of `p`, both on the clean branch and with a Z
/// error on the measured site. Both comparisons must hold with one shared
/// proportionality scalar.
pub fn reconstruction_check(p: &ValenceProjector, q: &ValenceProjector) -> Result<bool> {
    // Unnormalized target chain and the pair left by measuring the last site.
    let mut target = [ZERO; 8];
    for a in 0..2 {
        for j in 0..2 {
            for b in 0..2 {
                target[a * 4 + j * 2 + b] = p.alpha[b][j][a];
            }
        }
    }
    let mut pair = [[ZERO; 2]; 2];
    for a in 0..2 {
        for j in 0..2 {
            pair[a][j] = p.alpha[0][j][a];
        }
    }
    // Fresh maximally entangled pair on sites (k, b).
    let phi = |k: usize, b: usize| {
        if k == b {
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        } else {
            ZERO
        }
    };
    // glued[a, j', b] = sum over j, k of beta[j', jk] pair[a, j] phi[k, b],
    // with an optional Z flip on the pair's open site j.
    let glue = |z_on_pair: bool| {
        let mut out = [ZERO; 8];
        for a in 0..2 {
            for jp in 0..2 {
                for b in 0..2 {
                    let mut acc = ZERO;
                    for j in 0..2 {
                        for k in 0..2 {
                            let sign = if z_on_pair && j == 1 { -1.0 } else { 1.0 };
                            acc += q.alpha[k][jp][j] * pair[a][j] * phi(k, b) * sign;
                        }
                    }
                    out[a * 4 + jp * 2 + b] = acc;
                }
            }
        }
        out
    };
    let clean = glue(false);
    let noisy = glue(true);
    let mut target_z = [ZERO; 8];
    for (idx, t) in target.iter().enumerate() {
        let j = idx >> 1 & 1;
        target_z[idx] = if j == 1 { -t } else { *t };
    }

    let norm = |v: &[Complex64; 8]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let clean_norm = norm(&clean);
    let target_norm = norm(&target);
    if clean_norm <= 1e-14 * target_norm {
        return Ok(false);
    }
    // Least-squares scalar aligning the clean branch, then reused verbatim
    // for the noisy branch: reconstruction must not rescale between branches.
    let ip: Complex64 = clean
        .iter()
        .zip(&target)
        .map(|(l, t)| l.conj() * t)
        .sum();
    let scalar = ip / (clean_norm * clean_norm);
    let defect = |lhs: &[Complex64; 8], rhs: &[Complex64; 8]| {
        lhs.iter()
            .zip(rhs)
            .map(|(l, r)| (l * scalar - r).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    Ok(defect(&clean, &target) <= ALGEBRA_TOL * target_norm
        && defect(&noisy, &target_z) <= ALGEBRA_TOL * target_norm)
}

/// Fill the remaining column of a projector whose optimality is symmetric in
/// the two pair indices: alpha[j, 00] = alpha[j, 01] alpha[j, 10] / alpha[j, 11].
/// Each row is given as [alpha_j01, alpha_j10, alpha_j11]; the alpha_j11
/// entries must be nonzero.
pub fn symmetric_p0(row0: [Complex64; 3], row1: [Complex64; 3]) -> Result<ValenceProjector> {
    let mut rows = [[ZERO; 4]; 2];
    for (j, row) in [row0, row1].iter().enumerate() {
        let [a01, a10, a11] = *row;
        if a11.norm() <= 1e-300 {
            return Err(Error::Invalid(format!(
                "symmetric completion divides by alpha[{j}, 11], which is zero"
            )));
        }
        rows[j] = [a01 * a10 / a11, a01, a10, a11];
    }
    ValenceProjector::from_rows(&rows)
}

/// Two-parameter phase family: alpha[0, .] = 1, alpha[1, 01] = exp(i t1),
/// alpha[1, 10] = exp(i t2), alpha[1, 11] = exp(i (t1 + t2)). These chains are
/// built by controlled-phase gates of angles t1, t2; t1 = t2 = pi is the
/// three-qubit linear cluster state.
pub fn weighted_projector(theta1: f64, theta2: f64) -> ValenceProjector {
    let phase = |t: f64| Complex64::from_polar(1.0, t);
    symmetric_p0(
        [ONE, ONE, ONE],
        [phase(theta1), phase(theta2), phase(theta1 + theta2)],
    )
    .expect("unit-modulus denominators")
}
