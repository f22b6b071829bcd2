//! The two-colorable multipartite purification protocol: P1/P2 step maps,
//! sequence runs with traces, and the regime search with its strategy set.
//!
//! Near a purification threshold the step dynamics passes exponentially close
//! to invariant trap families (two points at 1/2, four at 1/4, ...), where
//! the physically meaningful deviations sink far below f64 resolution (down
//! to ~1e-39 on the cases this crate reproduces) while an unstable mode
//! doubles them per step. Double precision both stalls on real escapes and
//! can amplify its own rounding noise into fake ones. [`search_regime`]
//! therefore iterates in 384-bit fixed point (~115 decimal digits) for up to
//! [`WIDE_SEARCH_MAX_QUBITS`] qubits: true saddle passages survive with wide
//! margin, and quantization noise cannot reach O(1) within sane budgets
//! (doubling from 2^-384 needs more steps than the default 300). The
//! per-step public API ([`p1_step`], [`p2_step`], [`run_sequence`]) stays in
//! f64, which is fine away from thresholds.

use crate::diag::{DiagonalState, MAX_PROTOCOL_QUBITS};
use crate::graph::Graph;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Fidelity above which a state counts as purified.
pub const SUCCESS_FIDELITY: f64 = 1.0 - 1e-9;

/// Attractor candidates {1/2^k} are matched within this tolerance.
pub const ATTRACTOR_TOL: f64 = 1e-6;

/// Largest system iterated in fixed point by [`search_regime`]; larger
/// states fall back to f64 (recorded in the verdict's `arithmetic` field).
pub const WIDE_SEARCH_MAX_QUBITS: usize = 10;

/// A diagonal state packed by a two-coloring: index = μ_A · 2^|B| + μ_B,
/// where bit k of μ_A is the syndrome bit of the k-th A-qubit (ascending),
/// likewise for B.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoredState {
    a_qubits: Vec<usize>,
    b_qubits: Vec<usize>,
    lambda: Vec<f64>,
}

fn gather_bits(index: usize, qubits: &[usize]) -> usize {
    let mut out = 0;
    for (k, &q) in qubits.iter().enumerate() {
        out |= ((index >> q) & 1) << k;
    }
    out
}

fn scatter_bits(packed: usize, qubits: &[usize]) -> usize {
    let mut out = 0;
    for (k, &q) in qubits.iter().enumerate() {
        out |= ((packed >> k) & 1) << q;
    }
    out
}

impl ColoredState {
    /// Pack `state` using the A-side mask (B is the complement).
    pub fn from_masks(state: &DiagonalState, a_mask: u32) -> Result<Self> {
        let n = state.n();
        if n > MAX_PROTOCOL_QUBITS {
            return Err(Error::TooManyVertices(n));
        }
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        if a_mask & !full != 0 {
            return Err(Error::InvalidState(format!(
                "coloring mask {a_mask:#b} exceeds {n} qubits"
            )));
        }
        let a_qubits: Vec<usize> = (0..n).filter(|&q| a_mask >> q & 1 == 1).collect();
        let b_qubits: Vec<usize> = (0..n).filter(|&q| a_mask >> q & 1 == 0).collect();
        let nb = b_qubits.len();
        let mut lambda = vec![0.0; 1 << n];
        for (j, &w) in state.lambda().iter().enumerate() {
            let ua = gather_bits(j, &a_qubits);
            let ub = gather_bits(j, &b_qubits);
            lambda[(ua << nb) | ub] = w;
        }
        Ok(ColoredState { a_qubits, b_qubits, lambda })
    }

    /// Pack using the graph's proper two-coloring (vertex 0 on side A).
    pub fn from_graph(g: &Graph, state: &DiagonalState) -> Result<Self> {
        if g.n() != state.n() {
            return Err(Error::DimensionMismatch(format!(
                "graph on {} vertices, state on {} qubits",
                g.n(),
                state.n()
            )));
        }
        let (a, _) = g.two_coloring().ok_or(Error::NotTwoColorable)?;
        Self::from_masks(state, a)
    }

    /// Build directly from a packed weight vector (geometry-free; A-qubits
    /// are taken to be 0..n_a and B-qubits n_a..n_a+n_b).
    pub fn from_packed(n_a: usize, n_b: usize, lambda: Vec<f64>) -> Result<Self> {
        if n_a + n_b > MAX_PROTOCOL_QUBITS {
            return Err(Error::TooManyVertices(n_a + n_b));
        }
        if lambda.len() != 1 << (n_a + n_b) {
            return Err(Error::DimensionMismatch(format!(
                "packed state needs {} entries, got {}",
                1usize << (n_a + n_b),
                lambda.len()
            )));
        }
        // The input is already in packed order (μ_A in the high bits), so
        // adopt it directly; re-gathering through from_masks would read it
        // as a qubit-indexed vector and permute A against B.
        let state = DiagonalState::from_unnormalized(n_a + n_b, lambda)?;
        Ok(ColoredState {
            a_qubits: (0..n_a).collect(),
            b_qubits: (n_a..n_a + n_b).collect(),
            lambda: state.lambda().to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.a_qubits.len() + self.b_qubits.len()
    }

    pub fn n_a(&self) -> usize {
        self.a_qubits.len()
    }

    pub fn n_b(&self) -> usize {
        self.b_qubits.len()
    }

    pub fn a_qubits(&self) -> &[usize] {
        &self.a_qubits
    }

    pub fn b_qubits(&self) -> &[usize] {
        &self.b_qubits
    }

    /// Packed weights, index = μ_A · 2^|B| + μ_B.
    pub fn packed(&self) -> &[f64] {
        &self.lambda
    }

    /// Weight of the error-free component.
    pub fn fidelity(&self) -> f64 {
        self.lambda[0]
    }

    pub fn max_element(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }

    /// Unpack to qubit-indexed form.
    pub fn to_state(&self) -> DiagonalState {
        let nb = self.b_qubits.len();
        let mut lambda = vec![0.0; self.lambda.len()];
        for (packed, &w) in self.lambda.iter().enumerate() {
            let j = scatter_bits(packed >> nb, &self.a_qubits)
                | scatter_bits(packed & ((1 << nb) - 1), &self.b_qubits);
            lambda[j] = w;
        }
        DiagonalState::from_unnormalized(self.n(), lambda)
            .expect("packed state is normalized")
    }
}

/// Which sub-protocol a step applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    P1,
    P2,
}

/// Raw quadratic map of one step on the packed weights; returns the
/// unnormalized output and its total (the success probability).
fn step_raw(lambda: &[f64], n_a: usize, n_b: usize, kind: StepKind) -> (Vec<f64>, f64) {
    let (rows, cols) = (1usize << n_a, 1usize << n_b);
    let mut out = vec![0.0; lambda.len()];
    match kind {
        StepKind::P1 => {
            // Row-wise XOR autoconvolution over B.
            for ua in 0..rows {
                let row = &lambda[ua * cols..(ua + 1) * cols];
                let dst = &mut out[ua * cols..(ua + 1) * cols];
                for nb in 0..cols {
                    let w = row[nb];
                    if w == 0.0 {
                        continue;
                    }
                    for ub in 0..cols {
                        dst[ub] += w * row[ub ^ nb];
                    }
                }
            }
        }
        StepKind::P2 => {
            // Column-wise XOR autoconvolution over A.
            for ub in 0..cols {
                for na in 0..rows {
                    let w = lambda[na * cols + ub];
                    if w == 0.0 {
                        continue;
                    }
                    for ua in 0..rows {
                        out[ua * cols + ub] += w * lambda[(ua ^ na) * cols + ub];
                    }
                }
            }
        }
    }
    let total = out.iter().sum();
    (out, total)
}

/// Apply P1: per A-syndrome row, the B-marginal self-convolves; renormalize.
/// Returns the new state and the success probability (pre-normalization sum).
pub fn p1_step(cs: &ColoredState) -> Result<(ColoredState, f64)> {
    apply_step(cs, StepKind::P1)
}

/// Apply P2: mirror of [`p1_step`] with the roles of A and B swapped.
pub fn p2_step(cs: &ColoredState) -> Result<(ColoredState, f64)> {
    apply_step(cs, StepKind::P2)
}

fn apply_step(cs: &ColoredState, kind: StepKind) -> Result<(ColoredState, f64)> {
    let (mut out, total) = step_raw(&cs.lambda, cs.n_a(), cs.n_b(), kind);
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroProbability);
    }
    for x in &mut out {
        *x /= total;
    }
    Ok((
        ColoredState {
            a_qubits: cs.a_qubits.clone(),
            b_qubits: cs.b_qubits.clone(),
            lambda: out,
        },
        total,
    ))
}

/// One recorded protocol step.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub kind: StepKind,
    /// Weight at index 0 after the step.
    pub fidelity: f64,
    /// Pre-normalization total of the quadratic map.
    pub success_prob: f64,
    pub max_element: f64,
}

/// Trace of a full protocol run.
#[derive(Clone, Debug)]
pub struct GmppTrace {
    pub steps: Vec<StepRecord>,
    pub final_state: ColoredState,
}

/// Apply an explicit step sequence, recording fidelity and success per step.
pub fn run_sequence(cs: &ColoredState, steps: &[StepKind]) -> Result<GmppTrace> {
    if steps.is_empty() {
        return Err(Error::Invalid("empty step sequence".into()));
    }
    let mut state = cs.clone();
    let mut records = Vec::with_capacity(steps.len());
    for &kind in steps {
        let (next, success) = apply_step(&state, kind)?;
        state = next;
        records.push(StepRecord {
            kind,
            fidelity: state.fidelity(),
            success_prob: success,
            max_element: state.max_element(),
        });
    }
    Ok(GmppTrace { steps: records, final_state: state })
}

// ---------------------------------------------------------------------------
// Fixed-point iteration (the wide engine behind search_regime)
// ---------------------------------------------------------------------------

/// Fixed-point scale: weights are integers w with probability = w / 2^384.
const FIXED_BITS: u32 = 384;

/// Exact conversion of a probability to the fixed-point grid (truncating
/// only below 2^-384).
fn to_fixed(x: f64) -> BigUint {
    if x <= 0.0 {
        return BigUint::default();
    }
    // x = m * 2^(e-52) with 53-bit integer m.
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let (m, e) = if exp_field == 0 {
        (bits & ((1u64 << 52) - 1), -1074i64)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), exp_field - 1075)
    };
    let shift = e + FIXED_BITS as i64;
    let m = BigUint::from(m);
    if shift >= 0 {
        m << (shift as usize)
    } else {
        m >> ((-shift) as usize)
    }
}

fn fixed_to_f64(v: &BigUint, scale_bits: u32) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(scale_bits as i32)
}

/// Engine abstraction so strategies run identically in f64 and fixed point.
trait StepEngine: Clone + Send {
    fn apply(&mut self, kind: StepKind) -> Result<()>;
    fn max_f64(&self) -> f64;
    /// True if the largest weight exceeds the success threshold.
    fn succeeded(&self) -> bool;
    /// Compare this engine's error-free weight against another's (exactly
    /// in the wide engine; the greedy chooser relies on this resolution).
    fn cmp_fidelity(&self, other: &Self) -> std::cmp::Ordering;
}

#[derive(Clone)]
struct F64Engine {
    lambda: Vec<f64>,
    n_a: usize,
    n_b: usize,
}

impl StepEngine for F64Engine {
    fn apply(&mut self, kind: StepKind) -> Result<()> {
        let (mut out, total) = step_raw(&self.lambda, self.n_a, self.n_b, kind);
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::ZeroProbability);
        }
        for x in &mut out {
            *x /= total;
        }
        self.lambda = out;
        Ok(())
    }

    fn max_f64(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }

    fn succeeded(&self) -> bool {
        self.max_f64() > SUCCESS_FIDELITY
    }

    fn cmp_fidelity(&self, other: &Self) -> std::cmp::Ordering {
        self.lambda[0].partial_cmp(&other.lambda[0]).unwrap()
    }
}

#[derive(Clone)]
struct WideEngine {
    lambda: Vec<BigUint>,
    n_a: usize,
    n_b: usize,
    threshold: BigUint,
}

impl WideEngine {
    fn new(cs: &ColoredState) -> Self {
        WideEngine {
            lambda: cs.lambda.iter().map(|&x| to_fixed(x)).collect(),
            n_a: cs.n_a(),
            n_b: cs.n_b(),
            threshold: to_fixed(SUCCESS_FIDELITY),
        }
    }

    fn max_fixed(&self) -> &BigUint {
        self.lambda.iter().max().expect("nonempty state")
    }
}

impl StepEngine for WideEngine {
    fn apply(&mut self, kind: StepKind) -> Result<()> {
        let (rows, cols) = (1usize << self.n_a, 1usize << self.n_b);
        let zero = BigUint::default();
        let mut out = vec![BigUint::default(); self.lambda.len()];
        match kind {
            StepKind::P1 => {
                for ua in 0..rows {
                    let row = &self.lambda[ua * cols..(ua + 1) * cols];
                    for nb in 0..cols {
                        if row[nb] == zero {
                            continue;
                        }
                        for ub in 0..cols {
                            out[ua * cols + ub] += &row[nb] * &row[ub ^ nb];
                        }
                    }
                }
            }
            StepKind::P2 => {
                for ub in 0..cols {
                    for na in 0..rows {
                        let w = &self.lambda[na * cols + ub];
                        if *w == zero {
                            continue;
                        }
                        for ua in 0..rows {
                            out[ua * cols + ub] += w * &self.lambda[(ua ^ na) * cols + ub];
                        }
                    }
                }
            }
        }
        let total: BigUint = out.iter().sum();
        if total == zero {
            return Err(Error::ZeroProbability);
        }
        // Renormalize back to scale 2^384 (products carry scale 2^768).
        for x in &mut out {
            let scaled: BigUint = std::mem::take(x) << FIXED_BITS;
            *x = scaled / &total;
        }
        self.lambda = out;
        Ok(())
    }

    fn max_f64(&self) -> f64 {
        fixed_to_f64(self.max_fixed(), FIXED_BITS)
    }

    fn succeeded(&self) -> bool {
        *self.max_fixed() > self.threshold
    }

    fn cmp_fidelity(&self, other: &Self) -> std::cmp::Ordering {
        self.lambda[0].cmp(&other.lambda[0])
    }
}

// ---------------------------------------------------------------------------
// Regime search
// ---------------------------------------------------------------------------

/// Search budget. Defaults: 300 steps, 32 random restarts, seed 42, all
/// strategy families enabled.
#[derive(Clone, Debug)]
pub struct Budget {
    pub max_steps: usize,
    pub random_restarts: usize,
    pub seed: u64,
    pub alternations: bool,
    pub greedy: bool,
    pub random: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 300,
            random_restarts: 32,
            seed: 42,
            alternations: true,
            greedy: true,
            random: true,
        }
    }
}

/// Outcome of the regime search.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeVerdict {
    /// Some strategy exceeded the success fidelity (and no separability
    /// proof contradicts it).
    pub purifiable: bool,
    /// Largest weight reached, maximized over strategies. Up to a free
    /// XOR relabeling this is the best achievable fidelity; on every
    /// validated case the final argmax is already index 0.
    pub best_fidelity: f64,
    /// When not purifiable: the limiting fidelity snapped to the nearest
    /// 1/2^k within [`ATTRACTOR_TOL`], if one matches.
    pub attractor_estimate: Option<f64>,
    pub best_strategy: String,
    pub steps_to_success: Option<usize>,
    /// The input was conditionally separable across a one-crossing-edge
    /// cut, so fidelity provably can never exceed 1/2.
    pub proven_unpurifiable: bool,
    /// A-side mask of the separability witness cut, when proven.
    pub separability_witness: Option<u32>,
    /// "fixed384" (384-bit fixed point) or "f64" (large-state fallback).
    pub arithmetic: &'static str,
}

#[derive(Clone, Debug)]
struct StrategyOutcome {
    id: String,
    steps_to_success: Option<usize>,
    final_max: f64,
}

enum Chooser {
    Fixed(Box<dyn Fn(usize) -> StepKind + Send + Sync>),
    Greedy,
    Random(u64),
}

fn run_strategy<E: StepEngine>(
    engine: &E,
    chooser: &Chooser,
    id: &str,
    max_steps: usize,
) -> StrategyOutcome {
    let mut cur = engine.clone();
    let mut rng = match chooser {
        Chooser::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    for step in 0..max_steps {
        let kind = match chooser {
            Chooser::Fixed(f) => f(step),
            Chooser::Random(_) => {
                if rng.as_mut().unwrap().gen::<bool>() {
                    StepKind::P1
                } else {
                    StepKind::P2
                }
            }
            Chooser::Greedy => {
                // Depth-2 lookahead on the resulting error-free weight;
                // candidates in fixed order, strict improvement to switch,
                // so ties resolve to the earliest (P1 first).
                let mut best: Option<(E, StepKind)> = None;
                for first in [StepKind::P1, StepKind::P2] {
                    for second in [StepKind::P1, StepKind::P2] {
                        let mut probe = cur.clone();
                        if probe.apply(first).is_err() || probe.apply(second).is_err() {
                            continue;
                        }
                        let better = match &best {
                            None => true,
                            Some((b, _)) => {
                                probe.cmp_fidelity(b) == std::cmp::Ordering::Greater
                            }
                        };
                        if better {
                            best = Some((probe, first));
                        }
                    }
                }
                match best {
                    Some((_, kind)) => kind,
                    None => break,
                }
            }
        };
        if cur.apply(kind).is_err() {
            break;
        }
        if cur.succeeded() {
            return StrategyOutcome {
                id: id.to_string(),
                steps_to_success: Some(step + 1),
                final_max: cur.max_f64(),
            };
        }
    }
    StrategyOutcome {
        id: id.to_string(),
        steps_to_success: None,
        final_max: cur.max_f64(),
    }
}

fn strategy_set(budget: &Budget) -> Vec<(String, Chooser)> {
    let mut set: Vec<(String, Chooser)> = Vec::new();
    if budget.alternations {
        set.push((
            "alt-p1p2".into(),
            Chooser::Fixed(Box::new(|i| if i % 2 == 0 { StepKind::P1 } else { StepKind::P2 })),
        ));
        set.push((
            "alt-p2p1".into(),
            Chooser::Fixed(Box::new(|i| if i % 2 == 0 { StepKind::P2 } else { StepKind::P1 })),
        ));
    }
    if budget.greedy {
        set.push(("greedy".into(), Chooser::Greedy));
    }
    if budget.random {
        for r in 0..budget.random_restarts {
            set.push((
                format!("rand-{r:02}"),
                Chooser::Random(budget.seed.wrapping_add(r as u64)),
            ));
        }
    }
    set
}

fn search_with_engine<E: StepEngine + Sync>(
    engine: E,
    budget: &Budget,
    arithmetic: &'static str,
    n: usize,
) -> RegimeVerdict {
    let strategies = strategy_set(budget);
    let outcomes: Vec<StrategyOutcome> = strategies
        .par_iter()
        .map(|(id, chooser)| run_strategy(&engine, chooser, id, budget.max_steps))
        .collect();
    // Deterministic merge: best final weight, ties to the smallest id.
    let winner = outcomes
        .iter()
        .max_by(|a, b| {
            a.final_max
                .partial_cmp(&b.final_max)
                .unwrap()
                .then_with(|| b.id.cmp(&a.id))
        })
        .cloned()
        .unwrap_or(StrategyOutcome {
            id: "none".into(),
            steps_to_success: None,
            final_max: engine.max_f64(),
        });
    let purifiable = winner.steps_to_success.is_some();
    let attractor_estimate = if purifiable {
        None
    } else {
        (0..=n as i32)
            .map(|k| 0.5f64.powi(k))
            .find(|c| (winner.final_max - c).abs() <= ATTRACTOR_TOL)
    };
    RegimeVerdict {
        purifiable,
        best_fidelity: winner.final_max,
        attractor_estimate,
        best_strategy: winner.id,
        steps_to_success: winner.steps_to_success,
        proven_unpurifiable: false,
        separability_witness: None,
        arithmetic,
    }
}

/// Explore purifiability of `cs` within a step budget.
///
/// Strategies: the two alternations, depth-2 greedy, and seeded random
/// sequences; run in parallel and merged deterministically. Verdict is
/// `purifiable` as soon as one strategy exceeds [`SUCCESS_FIDELITY`];
/// otherwise the limiting fidelity is matched against attractors 1/2^k.
/// A negative verdict is evidence, not proof (see
/// [`search_regime_with_graph`] for the provable cap).
pub fn search_regime(cs: &ColoredState, budget: &Budget) -> RegimeVerdict {
    if cs.n() <= WIDE_SEARCH_MAX_QUBITS {
        search_with_engine(WideEngine::new(cs), budget, "fixed384", cs.n())
    } else {
        let engine = F64Engine {
            lambda: cs.lambda.clone(),
            n_a: cs.n_a(),
            n_b: cs.n_b(),
        };
        search_with_engine(engine, budget, "f64", cs.n())
    }
}

/// [`search_regime`] plus a separability proof: if the state is
/// conditionally separable across some cut with exactly one crossing edge,
/// both sub-protocols (being per-site maps on the two copies, hence LOCC
/// across every spatial cut) can never raise fidelity above 1/2, and the
/// verdict reports `proven_unpurifiable` with the witness cut. A numerical
/// "success" on such an input is discarded as an artifact.
pub fn search_regime_with_graph(
    g: &Graph,
    cs: &ColoredState,
    budget: &Budget,
) -> Result<RegimeVerdict> {
    let state = cs.to_state();
    let witness = crate::thresholds::separability_cap_witness(g, &state)?;
    let mut verdict = search_regime(cs, budget);
    if let Some(cut) = witness {
        verdict.proven_unpurifiable = true;
        verdict.separability_witness = Some(cut.mask);
        if verdict.purifiable {
            verdict.purifiable = false;
            verdict.steps_to_success = None;
            verdict.attractor_estimate = None;
        }
    }
    Ok(verdict)
}

/// Parse a step-sequence string like "P1P2P1" (case-insensitive, separators
/// optional).
pub fn parse_sequence(s: &str) -> Result<Vec<StepKind>> {
    let compact: String = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',' && *c != '-')
        .collect();
    let upper = compact.to_ascii_uppercase();
    let bytes = upper.as_bytes();
    if bytes.len() % 2 != 0 {
        return Err(Error::Invalid(format!("bad step sequence `{s}`")));
    }
    let mut steps = Vec::with_capacity(bytes.len() / 2);
    for chunk in bytes.chunks(2) {
        match chunk {
            b"P1" => steps.push(StepKind::P1),
            b"P2" => steps.push(StepKind::P2),
            _ => return Err(Error::Invalid(format!("bad step sequence `{s}`"))),
        }
    }
    if steps.is_empty() {
        return Err(Error::Invalid("empty step sequence".into()));
    }
    Ok(steps)
}
