//! Diagonal states in the graph-state basis and their noise constructors.
//!
//! A state is a probability vector over Z-error syndromes. Bit convention,
//! used everywhere including serialized output: qubit `i` is bit `i` of the
//! index, qubit 0 least significant; index 0 is the error-free component, so
//! `lambda[0]` is the fidelity.

use crate::graph::Graph;
use crate::{Error, Result};
use serde::ser::{Serialize, SerializeStruct, Serializer};

/// Hard cap on qubit count for dense 2^n state vectors.
pub const MAX_STATE_QUBITS: usize = 24;

/// Cap for protocol runs (steps cost O(4^n) in the worst split).
pub const MAX_PROTOCOL_QUBITS: usize = 14;

/// Normalization tolerance: constructors accept vectors whose sum deviates
/// from 1 by at most this much, then renormalize exactly.
pub const NORM_TOL: f64 = 1e-12;

/// Probability vector over Z-error syndromes of an n-qubit graph state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalState {
    n: usize,
    lambda: Vec<f64>,
}

impl DiagonalState {
    /// Build from a normalized weight vector (sum within [`NORM_TOL`] of 1).
    pub fn new(n: usize, lambda: Vec<f64>) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyVertices(n));
        }
        if lambda.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "state on {n} qubits needs {} entries, got {}",
                1usize << n,
                lambda.len()
            )));
        }
        if lambda.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidState(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = lambda.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "weights sum to {total}, expected 1 within {NORM_TOL}"
            )));
        }
        Self::from_unnormalized(n, lambda)
    }

    /// Build from any nonnegative weight vector with positive sum; rescales.
    pub fn from_unnormalized(n: usize, mut lambda: Vec<f64>) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyVertices(n));
        }
        if lambda.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "state on {n} qubits needs {} entries, got {}",
                1usize << n,
                lambda.len()
            )));
        }
        if lambda.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidState(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = lambda.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        for x in &mut lambda {
            *x /= total;
        }
        Ok(DiagonalState { n, lambda })
    }

    /// The noiseless state: all weight on syndrome 0.
    pub fn pure(n: usize) -> Result<Self> {
        let mut lambda = vec![0.0; 1usize << n];
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyVertices(n));
        }
        lambda[0] = 1.0;
        Ok(DiagonalState { n, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Weight of the error-free component.
    pub fn fidelity(&self) -> f64 {
        self.lambda[0]
    }

    pub fn max_element(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }

    /// Index of the largest entry, smallest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.lambda.iter().enumerate() {
            if x > self.lambda[best] {
                best = i;
            }
        }
        best
    }

    /// XOR-relabel indices so the largest entry lands at 0 (a free local-Z
    /// relabeling). Returns the new state and the syndrome applied.
    pub fn promote_max(&self) -> (Self, usize) {
        let shift = self.argmax();
        (self.xor_relabel(shift), shift)
    }

    /// Relabel every index by XOR with `mask` (an involution).
    pub fn xor_relabel(&self, mask: usize) -> Self {
        let mut lambda = vec![0.0; self.lambda.len()];
        for (i, &x) in self.lambda.iter().enumerate() {
            lambda[i ^ mask] = x;
        }
        DiagonalState { n: self.n, lambda }
    }

    /// Sum out one qubit's syndrome bit (the effect of measuring it in Z and
    /// discarding the outcome on the diagonal weights).
    pub fn marginalize(&self, qubit: usize) -> Result<Self> {
        if qubit >= self.n {
            return Err(Error::VertexOutOfRange { vertex: qubit, n: self.n });
        }
        if self.n < 2 {
            return Err(Error::InvalidState(
                "cannot marginalize a 1-qubit state".into(),
            ));
        }
        let low_mask = (1usize << qubit) - 1;
        let mut lambda = vec![0.0; 1 << (self.n - 1)];
        for (u, slot) in lambda.iter_mut().enumerate() {
            let low = u & low_mask;
            let high = (u >> qubit) << (qubit + 1);
            *slot = self.lambda[high | low] + self.lambda[high | (1 << qubit) | low];
        }
        Ok(DiagonalState { n: self.n - 1, lambda })
    }

    /// XOR convolution: the state after applying two independent syndrome
    /// layers with these distributions.
    pub fn xor_convolve(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "convolving {}-qubit with {}-qubit state",
                self.n, other.n
            )));
        }
        let mut lambda = vec![0.0; self.lambda.len()];
        for (i, &a) in self.lambda.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.lambda.iter().enumerate() {
                lambda[i ^ j] += a * b;
            }
        }
        DiagonalState::from_unnormalized(self.n, lambda)
    }
}

impl Serialize for DiagonalState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DiagonalState", 3)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("convention", "qubit i = bit i, qubit 0 least significant; index 0 = error-free")?;
        s.serialize_field("lambda", &self.lambda)?;
        s.end()
    }
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Z-syndrome of a Pauli pattern acting on the graph state, phases dropped.
///
/// Per stabilizer algebra: X on qubit i flips the syndrome bits of N(i),
/// Y flips {i} ∪ N(i), Z flips {i}; contributions XOR.
pub fn pauli_to_syndrome(g: &Graph, pattern: &[Pauli]) -> Result<u32> {
    if pattern.len() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "pattern length {} for graph on {} vertices",
            pattern.len(),
            g.n()
        )));
    }
    let mut syndrome = 0u32;
    for (i, &p) in pattern.iter().enumerate() {
        syndrome ^= match p {
            Pauli::I => 0,
            Pauli::X => g.neighbors(i),
            Pauli::Y => g.neighbors(i) | (1 << i),
            Pauli::Z => 1 << i,
        };
    }
    Ok(syndrome)
}

/// Noise model selector for [`from_noise`].
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    /// Independent Z flip with probability `p` on every qubit.
    Z { p: f64 },
    /// Independent X/Y/Z with the same rates on every qubit.
    LocalPauli { px: f64, py: f64, pz: f64 },
    /// Local depolarizing: X, Y, Z each at rate p/3 on every qubit.
    Depol { p: f64 },
    /// Globally depolarized family: weight (1 + x·δ_{j,0}) / (2^n + x).
    Global { x: f64 },
    /// Thermal Z flips at p = e^{-βΔ} / (1 + e^{-βΔ}).
    Thermal { beta: f64, delta: f64 },
    /// Explicit per-qubit (p_x, p_y, p_z) triples.
    Pattern(Vec<[f64; 3]>),
}

fn check_triple(px: f64, py: f64, pz: f64) -> Result<()> {
    for p in [px, py, pz] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidNoise(format!("rate {p} outside [0,1]")));
        }
    }
    if px + py + pz > 1.0 + 1e-15 {
        return Err(Error::InvalidNoise(format!(
            "rates sum to {} > 1",
            px + py + pz
        )));
    }
    Ok(())
}

/// Thermal excitation probability e^{-βΔ} / (1 + e^{-βΔ}).
pub fn thermal_flip_probability(beta: f64, delta: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::InvalidNoise(format!("gap {delta} must be positive")));
    }
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::InvalidNoise(format!(
            "inverse temperature {beta} must be nonnegative"
        )));
    }
    let w = (-beta * delta).exp();
    Ok(w / (1.0 + w))
}

/// Build the diagonal state of `g` under a noise model.
///
/// Pauli-type models are assembled by streaming XOR convolution of per-qubit
/// syndrome distributions in O(n·2^n).
pub fn from_noise(g: &Graph, spec: &NoiseSpec) -> Result<DiagonalState> {
    let n = g.n();
    if n > MAX_STATE_QUBITS {
        return Err(Error::TooManyVertices(n));
    }
    match spec {
        NoiseSpec::Z { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidNoise(format!("p={p} outside [0,1]")));
            }
            let mut lambda = vec![0.0; 1 << n];
            for (j, slot) in lambda.iter_mut().enumerate() {
                let w = j.count_ones() as i32;
                *slot = p.powi(w) * (1.0 - p).powi(n as i32 - w);
            }
            DiagonalState::from_unnormalized(n, lambda)
        }
        NoiseSpec::Thermal { beta, delta } => {
            let p = thermal_flip_probability(*beta, *delta)?;
            from_noise(g, &NoiseSpec::Z { p })
        }
        NoiseSpec::Global { x } => {
            if *x < 0.0 || !x.is_finite() {
                return Err(Error::InvalidNoise(format!("x={x} must be >= 0")));
            }
            let d = (1usize << n) as f64;
            let mut lambda = vec![1.0 / (d + x); 1 << n];
            lambda[0] = (1.0 + x) / (d + x);
            DiagonalState::from_unnormalized(n, lambda)
        }
        NoiseSpec::LocalPauli { px, py, pz } => {
            check_triple(*px, *py, *pz)?;
            from_pattern(g, &vec![[*px, *py, *pz]; n])
        }
        NoiseSpec::Depol { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidNoise(format!("p={p} outside [0,1]")));
            }
            from_pattern(g, &vec![[p / 3.0; 3]; n])
        }
        NoiseSpec::Pattern(triples) => {
            if triples.len() != n {
                return Err(Error::InvalidNoise(format!(
                    "{} triples for {} qubits",
                    triples.len(),
                    n
                )));
            }
            for &[px, py, pz] in triples {
                check_triple(px, py, pz)?;
            }
            from_pattern(g, triples)
        }
    }
}

fn from_pattern(g: &Graph, triples: &[[f64; 3]]) -> Result<DiagonalState> {
    let n = g.n();
    let mut lambda = vec![0.0; 1 << n];
    lambda[0] = 1.0;
    for (q, &[px, py, pz]) in triples.iter().enumerate() {
        let pi = 1.0 - px - py - pz;
        let mx = g.neighbors(q) as usize;
        let my = mx | (1 << q);
        let mz = 1usize << q;
        let mut next = vec![0.0; 1 << n];
        for (s, &w) in lambda.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            next[s] += w * pi;
            next[s ^ mx] += w * px;
            next[s ^ my] += w * py;
            next[s ^ mz] += w * pz;
        }
        lambda = next;
    }
    DiagonalState::from_unnormalized(n, lambda)
}
