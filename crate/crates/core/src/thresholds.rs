//! Threshold solvers: the noise strengths beyond which purification is
//! provably impossible, for local-Z, thermal, globally depolarizing and
//! local depolarizing noise.
//!
//! Every solver follows the same constructive pattern: exhibit a local
//! reduction of the noisy graph state to a two-qubit seed from which the
//! full state can be rebuilt, and report the point where that seed becomes
//! separable. Separability of the seed makes purification impossible, so
//! each result is an upper bound on any protocol's threshold, with the
//! witness recorded alongside the value.

use crate::diag::{from_noise, DiagonalState, NoiseSpec};
use crate::drpp::TwoQubitDiag;
use crate::graph::{Bipartition, Graph};
use crate::solve::bisect;
use crate::{Error, Result};
use serde::Serialize;

/// Result of a threshold computation, with enough context to audit it.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    /// Noise model the threshold applies to.
    pub model: String,
    /// Name of the swept parameter (p, x, or T).
    pub parameter: String,
    pub value: f64,
    /// Which pair/partition became separable at the threshold.
    pub witness: String,
    /// Solver tolerance on `value`.
    pub tolerance: f64,
}

/// Local-Z threshold probability for locally reconstructible graphs:
/// 1 - 1/sqrt(2).
pub fn z_lr_threshold() -> f64 {
    1.0 - std::f64::consts::FRAC_1_SQRT_2
}

/// The same threshold phrased as a fidelity: (1-p)^N at the critical p,
/// i.e. 2^(-N/2).
pub fn z_fidelity_threshold(n: usize) -> f64 {
    2f64.powf(-(n as f64) / 2.0)
}

/// Local-Z threshold for a graph of minimum degree `d_min`: the root of
/// 2(1-p)^(D+1) = (1-p)^D + p^D in (0, 1/2), found by bisection to 1e-10.
/// D = 1 recovers [`z_lr_threshold`]; the value increases towards 1/2 with
/// D.
pub fn z_general_threshold(d_min: usize) -> Result<f64> {
    if d_min == 0 {
        return Err(Error::Invalid("minimum degree must be at least 1".into()));
    }
    let d = d_min as i32;
    bisect(
        |p| 2.0 * (1.0 - p).powi(d + 1) - (1.0 - p).powi(d) - p.powi(d),
        1e-9,
        0.5 - 1e-9,
    )
}

/// Temperature above which the thermal graph state cannot be purified
/// (local energy gap `delta`, k_B = 1): -delta / ln(sqrt(2) - 1).
pub fn critical_temperature(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Invalid(format!("energy gap must be positive, got {delta}")));
    }
    Ok(-delta / (2f64.sqrt() - 1.0).ln())
}

/// The (D+1)-qubit GHZ reduction of Z-noise on a minimum-degree-D vertex,
/// and the two-qubit seed it rebuilds from.
///
/// Controlled-phase gates off the chosen vertex plus local square roots of
/// the stabilizers turn the state into a star (center = qubit 0, the
/// chosen original vertex = qubit 1) whose noise is X on qubit 1, Y on the
/// center, Z on the remaining leaves, each with probability p. The full
/// state's weights are indexed by (center bit) + 2*(leaf bit) + 4*(other
/// leaves); the seed is the conditional block where all other leaves are
/// error-free, normalized by (1-p)^D + p^D.
pub fn ghz_reduction(d_min: usize, p: f64) -> Result<(DiagonalState, TwoQubitDiag)> {
    if d_min == 0 {
        return Err(Error::Invalid("minimum degree must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidNoise(format!("probability {p} outside [0, 1]")));
    }
    let d = d_min as i32;
    let q = 1.0 - p;
    let blocks = 1usize << (d_min - 1);
    let mut lambda = vec![0.0; 4 * blocks];
    for j in 0..blocks {
        let w = j.count_ones() as i32;
        lambda[4 * j] = p.powi(w) * q.powi(d + 1 - w);
        lambda[4 * j + 1] = p.powi(w + 1) * q.powi(d - w);
        lambda[4 * j + 2] = p.powi(d + 1 - w) * q.powi(w);
        lambda[4 * j + 3] = q.powi(w + 1) * p.powi(d - w);
    }
    let full = DiagonalState::from_unnormalized(d_min + 1, lambda)?;
    let pair = TwoQubitDiag::from_unnormalized([
        q.powi(d + 1),
        p * q.powi(d),
        p.powi(d + 1),
        q * p.powi(d),
    ])?;
    Ok((full, pair))
}

/// Diagonal weights of the globally depolarized N-qubit graph state:
/// identity mixed with the pure state, entry j = (1 + x delta_j0)/(2^N + x).
pub fn global_diagonal(n: usize, x: f64) -> Result<DiagonalState> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::InvalidNoise(format!("mixing parameter {x} must be nonnegative")));
    }
    if n == 0 {
        return Err(Error::InvalidState("need at least one qubit".into()));
    }
    let mut lambda = vec![1.0; 1usize << n];
    lambda[0] = 1.0 + x;
    DiagonalState::from_unnormalized(n, lambda)
}

/// Threshold fidelity for global depolarizing noise: 3 / (2^N + 2),
/// the fidelity of the globally depolarized state at x = 2.
pub fn global_depol_threshold(n: usize) -> f64 {
    3.0 / (2f64.powi(n as i32) + 2.0)
}

/// Verify the inductive step behind the global-depolarizing threshold:
/// extending the (N-1)-qubit globally depolarized state by one qubit and
/// mixing its 2^(N-1) odd XOR-relabelings with weight (1-p)/2^(N-1) each
/// (keeping the extension with weight p = (2^(N-1)+x)/(2^N+x)) reproduces
/// the N-qubit globally depolarized state exactly. Checked to 1e-12.
pub fn check_inductive_mixing(n: usize, x: f64) -> Result<bool> {
    if n < 2 {
        return Err(Error::Invalid("inductive step needs at least 2 qubits".into()));
    }
    let prev = global_diagonal(n - 1, x)?;
    let dim = 1usize << n;
    // New qubit is bit 0; error-free extension leaves odd entries empty.
    let extended: Vec<f64> = (0..dim)
        .map(|i| if i & 1 == 0 { prev.lambda()[i >> 1] } else { 0.0 })
        .collect();
    let p = (2f64.powi(n as i32 - 1) + x) / (2f64.powi(n as i32) + x);
    let mut mix: Vec<f64> = extended.iter().map(|w| p * w).collect();
    let half = 1usize << (n - 1);
    let share = (1.0 - p) / half as f64;
    for t in 0..half {
        let m = 2 * t + 1;
        for (i, out) in mix.iter_mut().enumerate() {
            *out += share * extended[i ^ m];
        }
    }
    let target = global_diagonal(n, x)?;
    Ok(mix
        .iter()
        .zip(target.lambda())
        .all(|(a, b)| (a - b).abs() <= 1e-12))
}

/// True if the pair (u, v) is separable conditioned on every syndrome of
/// the remaining qubits: each conditional two-qubit distribution has
/// maximum weight <= 1/2. When this holds across a cut, no protocol acting
/// locally on the cut's sides can raise the pair above 1/2.
pub fn pair_conditionally_separable(state: &DiagonalState, u: usize, v: usize) -> Result<bool> {
    let n = state.n();
    if u >= n || v >= n || u == v {
        return Err(Error::Invalid(format!(
            "pair ({u}, {v}) invalid for {n} qubits"
        )));
    }
    let env: Vec<usize> = (0..n).filter(|&q| q != u && q != v).collect();
    let mut totals = vec![0.0f64; 1 << env.len()];
    let mut maxima = vec![[0.0f64; 4]; 1 << env.len()];
    for (idx, &w) in state.lambda().iter().enumerate() {
        let mut key = 0usize;
        for (pos, &q) in env.iter().enumerate() {
            key |= ((idx >> q) & 1) << pos;
        }
        let pair = ((idx >> u) & 1) | (((idx >> v) & 1) << 1);
        totals[key] += w;
        maxima[key][pair] += w;
    }
    Ok(totals.iter().zip(&maxima).all(|(&total, cell)| {
        total <= 0.0 || cell.iter().all(|&w| w <= 0.5 * total)
    }))
}

/// True if purification across `partition` is impossible for this state:
/// every crossing pair is conditionally separable under every environment
/// syndrome. Errors if the partition has no crossing edge.
pub fn partition_impossible(
    g: &Graph,
    state: &DiagonalState,
    partition: &Bipartition,
) -> Result<bool> {
    let crossing = partition.crossing_edges(g);
    if crossing.is_empty() {
        return Err(Error::NoCrossingEdge);
    }
    for (u, v) in crossing {
        if !pair_conditionally_separable(state, u, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scan for a proof that `state` cannot be purified on `g`: a bipartition
/// with exactly one crossing edge whose pair is conditionally separable.
/// Across such a cut the state is fully separable, capping fidelity at 1/2
/// under any sequence of cut-local operations. Returns the first witness
/// in ascending mask order.
pub fn separability_cap_witness(
    g: &Graph,
    state: &DiagonalState,
) -> Result<Option<Bipartition>> {
    let n = g.n();
    if n != state.n() {
        return Err(Error::DimensionMismatch(format!(
            "graph on {} vertices, state on {} qubits",
            n,
            state.n()
        )));
    }
    if n < 2 {
        return Ok(None);
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut mask: u32 = 1;
    while mask < full {
        if mask & 1 == 1 {
            let partition = Bipartition { mask };
            let crossing = partition.crossing_edges(g);
            if crossing.len() == 1 {
                let (u, v) = crossing[0];
                if pair_conditionally_separable(state, u, v)? {
                    return Ok(Some(partition));
                }
            }
        }
        mask += 2;
    }
    Ok(None)
}

/// One-parameter noise families swept by the partition solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NoiseFamily {
    /// Z-flip with probability p on every qubit.
    Z,
    /// Depolarizing with probability p on every qubit.
    Depol,
    /// Depolarizing with probability p on all but the last qubit.
    DepolPrefix,
}

impl NoiseFamily {
    pub fn spec(&self, n: usize, p: f64) -> NoiseSpec {
        match self {
            NoiseFamily::Z => NoiseSpec::Z { p },
            NoiseFamily::Depol => NoiseSpec::Depol { p },
            NoiseFamily::DepolPrefix => {
                let mut sites = vec![[p / 3.0; 3]; n];
                if let Some(last) = sites.last_mut() {
                    *last = [0.0; 3];
                }
                NoiseSpec::Pattern(sites)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseFamily::Z => "local-z",
            NoiseFamily::Depol => "local-depolarizing",
            NoiseFamily::DepolPrefix => "local-depolarizing-prefix",
        }
    }

    /// Upper end of the meaningful probability range.
    fn p_max(&self) -> f64 {
        match self {
            NoiseFamily::Z => 0.5,
            // A depolarizing channel is maximally mixing at p = 3/4; the
            // prefix family's last-split flip sits exactly at 1/2, so the
            // solver bracket must extend past it.
            NoiseFamily::Depol => 0.5,
            NoiseFamily::DepolPrefix => 0.75,
        }
    }
}

/// Bisection on a monotone boolean predicate: smallest parameter where
/// `pred` turns true. Requires pred(lo) = false and pred(hi) = true.
fn bisect_flip(
    mut pred: impl FnMut(f64) -> Result<bool>,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if pred(lo)? {
        return Err(Error::BracketFailure { lo, hi });
    }
    if !pred(hi)? {
        return Err(Error::BracketFailure { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest noise strength at which every crossing pair of `partition` is
/// conditionally separable — the point where this cut proves purification
/// impossible. Bisection to 1e-6.
pub fn partition_threshold(
    g: &Graph,
    family: NoiseFamily,
    partition: &Bipartition,
) -> Result<ThresholdResult> {
    let crossing = partition.crossing_edges(g);
    if crossing.is_empty() {
        return Err(Error::NoCrossingEdge);
    }
    let n = g.n();
    let value = bisect_flip(
        |p| partition_impossible(g, &from_noise(g, &family.spec(n, p))?, partition),
        1e-9,
        family.p_max() - 1e-9,
    )?;
    Ok(ThresholdResult {
        model: family.label().to_string(),
        parameter: "p".to_string(),
        value,
        witness: format!(
            "partition mask {:#b}: all conditional states of crossing pairs {:?} reach max weight <= 1/2",
            partition.mask, crossing
        ),
        tolerance: 1e-6,
    })
}

/// Impossibility bound for depolarized chains of growing length, built the
/// way a chain is grown: the last qubit is attached fresh (noiseless) and
/// the first N-1 carry depolarizing noise. The bound is the minimum of
/// [`partition_threshold`] over the contiguous splits; it is non-increasing
/// in N, unlike the all-qubits-noisy variant.
pub fn chain_extension_threshold(n: usize) -> Result<ThresholdResult> {
    if n < 3 {
        return Err(Error::Invalid("chain extension bound needs at least 3 qubits".into()));
    }
    let g = crate::graph::chain(n)?;
    let mut best: Option<(f64, usize)> = None;
    for k in 1..n {
        let partition = Bipartition { mask: (1u32 << k) - 1 };
        match partition_threshold(&g, NoiseFamily::DepolPrefix, &partition) {
            Ok(res) => {
                if best.map_or(true, |(v, _)| res.value < v) {
                    best = Some((res.value, k));
                }
            }
            Err(Error::BracketFailure { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let (value, k) = best.ok_or(Error::BracketFailure { lo: 1e-9, hi: 0.75 })?;
    Ok(ThresholdResult {
        model: NoiseFamily::DepolPrefix.label().to_string(),
        parameter: "p".to_string(),
        value,
        witness: format!(
            "chain of {n} qubits, last qubit noiseless; minimum over contiguous splits at k = {k} \
             (partition mask {:#b})",
            (1u32 << k) - 1
        ),
        tolerance: 1e-6,
    })
}
