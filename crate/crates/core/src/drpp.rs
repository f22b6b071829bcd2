//! Divide-and-rebuild analysis: reduce a noisy graph-diagonal state to a
//! two-qubit state per edge, decide pair purifiability, and the closed-form
//! performance bounds (geometric rate factor, depolarizing critical
//! probability, fully-connected Y-noise fidelity).

use crate::diag::{from_noise, DiagonalState, NoiseSpec};
use crate::graph::Graph;
use crate::solve::bisect;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Diagonal weights of a two-qubit pair. Entry k: bit 0 of k is the
/// syndrome of the pair's first qubit, bit 1 the second's.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoQubitDiag {
    lambda: [f64; 4],
}

impl TwoQubitDiag {
    /// Requires nonnegative entries summing to 1 within 1e-12.
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidState("negative or non-finite pair weight".into()));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "pair weights sum to {sum}, expected 1"
            )));
        }
        Ok(TwoQubitDiag { lambda })
    }

    pub fn from_unnormalized(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidState("negative or non-finite pair weight".into()));
        }
        let sum: f64 = lambda.iter().sum();
        if sum <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(TwoQubitDiag {
            lambda: [
                lambda[0] / sum,
                lambda[1] / sum,
                lambda[2] / sum,
                lambda[3] / sum,
            ],
        })
    }

    pub fn lambda(&self) -> [f64; 4] {
        self.lambda
    }

    pub fn max_entry(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_state(&self) -> Result<DiagonalState> {
        DiagonalState::new(2, self.lambda.to_vec())
    }
}

/// Marginal syndrome distribution of the pair (u, v): the state left by
/// Z-measuring every other qubit. Equals sequential marginalization in any
/// order.
pub fn reduce_to_edge(state: &DiagonalState, u: usize, v: usize) -> Result<TwoQubitDiag> {
    let n = state.n();
    if u >= n || v >= n || u == v {
        return Err(Error::Invalid(format!(
            "pair ({u}, {v}) invalid for {n} qubits"
        )));
    }
    let mut lambda = [0.0; 4];
    for (idx, &w) in state.lambda().iter().enumerate() {
        lambda[((idx >> u) & 1) | (((idx >> v) & 1) << 1)] += w;
    }
    TwoQubitDiag::from_unnormalized(lambda)
}

/// A diagonal pair can be purified to a Bell state iff its largest weight
/// strictly exceeds 1/2 (the boundary is separable).
pub fn pair_purifiable(pair: &TwoQubitDiag) -> bool {
    pair.max_entry() > 0.5
}

/// Per-edge outcome of [`drpp_verdict`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EdgeVerdict {
    pub edge: (usize, usize),
    pub max_entry: f64,
    pub purifiable: bool,
}

/// Divide-and-rebuild feasibility for a whole graph.
#[derive(Clone, Debug, Serialize)]
pub struct DrppVerdict {
    /// True iff every edge's reduced pair is purifiable.
    pub purifiable: bool,
    pub worst_edge: (usize, usize),
    pub worst_max_entry: f64,
    pub edges: Vec<EdgeVerdict>,
}

/// Reduce the noisy state of `g` to a pair per edge and test each for
/// purifiability; the rebuild succeeds iff all pairs pass. Requires a
/// connected graph.
pub fn drpp_verdict(g: &Graph, spec: &NoiseSpec) -> Result<DrppVerdict> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let state = from_noise(g, spec)?;
    let edges = g.edges();
    let verdicts: Vec<EdgeVerdict> = edges
        .par_iter()
        .map(|&(u, v)| {
            let pair = reduce_to_edge(&state, u, v).expect("edge endpoints valid");
            EdgeVerdict {
                edge: (u, v),
                max_entry: pair.max_entry(),
                purifiable: pair_purifiable(&pair),
            }
        })
        .collect();
    let worst = verdicts
        .iter()
        .min_by(|a, b| a.max_entry.partial_cmp(&b.max_entry).unwrap())
        .ok_or(Error::NoCrossingEdge)?;
    Ok(DrppVerdict {
        purifiable: verdicts.iter().all(|e| e.purifiable),
        worst_edge: worst.edge,
        worst_max_entry: worst.max_entry,
        edges: verdicts,
    })
}

/// Rate of rebuilding relative to plain pair purification: the rebuild
/// consumes at most `n_geo` pair-purification rounds per output copy, so
/// the relative rate lies in [1/n_geo, 1].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateBound {
    pub n_geo: usize,
    pub rate_lower: f64,
    pub rate_upper: f64,
}

impl RateBound {
    fn from_n_geo(n_geo: usize) -> Self {
        RateBound {
            n_geo: n_geo.max(1),
            rate_lower: 1.0 / n_geo.max(1) as f64,
            rate_upper: 1.0,
        }
    }
}

/// Geometric factor bound. Generic graphs get
/// min(2(D-1)D + 1, C(N,2)) from the maximum degree D; callers that know
/// the graph is a d-dimensional cluster pass `cluster_dim` to use the
/// size-independent value 3d^2 instead (a 2-d grid gives 12).
pub fn n_geo_bound(g: &Graph, cluster_dim: Option<usize>) -> RateBound {
    if let Some(d) = cluster_dim {
        return RateBound::from_n_geo(3 * d * d);
    }
    let dg = g.max_degree();
    let n = g.n();
    let degree_bound = if dg == 0 { 1 } else { 2 * (dg - 1) * dg + 1 };
    let pair_count = n * (n.saturating_sub(1)) / 2;
    RateBound::from_n_geo(degree_bound.min(pair_count.max(1)))
}

/// Probability that the neighbors attached to one pair qubit transmit no
/// net error onto it under Z-measurement, for local depolarizing noise:
/// q = (1 + (1 - 4p/3)^(D-1)) / 2.
pub fn transmission_clean_probability(d_g: usize, p: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 4.0 * p / 3.0).powi(d_g as i32 - 1))
}

/// Probability the reduced pair carries no net error: the pair's own error
/// classes g0/g1/g2 combined with clean/erroring transmissions per side.
pub fn pair_clean_probability(d_g: usize, p: f64) -> f64 {
    let q = transmission_clean_probability(d_g, p);
    let g0 = (1.0 - p) * (1.0 - p) + p * p / 3.0;
    let g1 = 2.0 * (1.0 - g0) / 3.0;
    let g2 = (1.0 - g0) / 3.0;
    g0 * q * q + g1 * q * (1.0 - q) + g2 * (1.0 - q) * (1.0 - q)
}

/// Critical local-depolarizing probability for the divide-and-rebuild
/// protocol on a two-colorable graph of maximum degree `d_g`: the root of
/// x^(2D) + 2x^(D+1) - 1 with x = 1 - 4p/3, found to 1e-10.
pub fn critical_depol(d_g: usize) -> Result<f64> {
    if d_g == 0 {
        return Err(Error::Invalid("maximum degree must be at least 1".into()));
    }
    let d = d_g as i32;
    let x = bisect(|x| x.powi(2 * d) + 2.0 * x.powi(d + 1) - 1.0, 0.0, 1.0)?;
    Ok(3.0 * (1.0 - x) / 4.0)
}

/// Fidelity below which the rebuild cannot purify the globally depolarized
/// N-qubit state: 1/3 + 1/(3 * 2^(N-1)), tending to 1/3.
pub fn max_depol_drpp_bound(n: usize) -> f64 {
    1.0 / 3.0 + 1.0 / (3.0 * 2f64.powi(n as i32 - 1))
}

/// Error-free weight of a fully-connected N-qubit graph state under local
/// Y-noise: all Y-errors produce the same syndrome, so the weight is the
/// probability of an even error count, ((1-2p)^N + 1) / 2.
pub fn fc_y_fidelity(n: usize, p: f64) -> f64 {
    0.5 * ((1.0 - 2.0 * p).powi(n as i32) + 1.0)
}
