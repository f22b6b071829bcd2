//! Census of locally reconstructible (LR) graphs.
//!
//! Three views of the same question, "how common are LR graphs":
//!
//! * exact labeled counts on few vertices ([`count_lr_report`]), delegating to
//!   [`graph::count_lr`];
//! * analytic abundance estimates from a random-bond model
//!   ([`match_probability`], [`any_partition_probability`],
//!   [`abundance_estimate`], [`ratio_bounds`]);
//! * structural sweeps over connected isomorphism classes: coverage of every
//!   local-complementation orbit by an LR member ([`lc_lr_coverage`]) and the
//!   short catalog of small-degree exceptions ([`degree3_nonlr_catalog`]).
//!
//! The random-bond model treats each of the q(n-q) possible bonds across a
//! fixed bipartition as an independent fair coin. A cut witnesses local
//! reconstruction when the bonds that cross it form a nonempty partial
//! matching (every vertex is met by at most one crossing bond, and at least
//! one bond is present: an empty cut carries no reconstruction data).

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;

use crate::graph::{self, canonical, is_lr, CanonicalForm, Graph};
use crate::{Error, Result};

/// Largest vertex count accepted by the class-based sweeps. Canonical-form
/// enumeration grows super-exponentially; 8 already yields 11k+ classes.
pub const MAX_CLASS_VERTICES: usize = 8;

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Probability that a uniformly random bond pattern across a fixed cut
/// (q vertices against the remaining n - q) is a nonempty partial matching:
/// sum over matching sizes b of C(q,b) C(n-q,b) b! / 2^(q(n-q)).
///
/// For q = 1 this is exactly (n-1)/2^(n-1), and the arithmetic below keeps it
/// exact in floating point (integer numerator, power-of-two denominator).
pub fn match_probability(n: usize, q: usize) -> Result<f64> {
    if n < 2 || n > graph::MAX_VERTICES {
        return Err(Error::Invalid(format!(
            "match probability needs 2 <= n <= {}, got {n}",
            graph::MAX_VERTICES
        )));
    }
    if q < 1 || 2 * q > n {
        return Err(Error::Invalid(format!(
            "cut size must satisfy 1 <= q <= n/2, got q={q}, n={n}"
        )));
    }
    let mut matchings = 0.0;
    let mut factorial = 1.0;
    for b in 1..=q {
        factorial *= b as f64;
        matchings += binom(q, b) * binom(n - q, b) * factorial;
    }
    Ok(matchings / 2f64.powi((q * (n - q)) as i32))
}

/// Probability that at least one of the C(n,q) cuts of size q is a nonempty
/// matching, treating cuts as independent: 1 - (1 - p)^C(n,q).
pub fn any_partition_probability(n: usize, q: usize) -> Result<f64> {
    let p = match_probability(n, q)?;
    Ok(1.0 - (1.0 - p).powf(binom(n, q)))
}

/// Heuristic estimate for the fraction of labeled graphs that are LR:
/// combine the least favorable cut size as 1 - (1 - P_min)^floor(n/2).
pub fn abundance_estimate(n: usize) -> Result<f64> {
    let mut p_min = f64::INFINITY;
    for q in 1..=n / 2 {
        p_min = p_min.min(any_partition_probability(n, q)?);
    }
    if !p_min.is_finite() {
        return Err(Error::Invalid(format!("no valid cut size for n={n}")));
    }
    Ok(1.0 - (1.0 - p_min).powi((n / 2) as i32))
}

/// Analytic bounds on the LR fraction |LR_n| / 2^C(n,2): the lower bound
/// (n-1)/2^(n-1) counts graphs with a fixed pendant vertex; the upper bound
/// n^3/2^n is an asymptotic envelope and may exceed 1 for small n (it is
/// reported as-is).
pub fn ratio_bounds(n: usize) -> Result<(f64, f64)> {
    if n < 2 || n > graph::MAX_VERTICES {
        return Err(Error::Invalid(format!(
            "ratio bounds need 2 <= n <= {}, got {n}",
            graph::MAX_VERTICES
        )));
    }
    let lower = (n - 1) as f64 / 2f64.powi((n - 1) as i32);
    let upper = (n * n * n) as f64 / 2f64.powi(n as i32);
    Ok((lower, upper))
}

/// Exact labeled census for one vertex count, with the analytic companions.
#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub n: usize,
    /// Graphs counted reconstructible by [`graph::components_lr`] among all
    /// 2^C(n,2) labeled graphs.
    pub lr_count: u64,
    /// Total number of labeled graphs, 2^C(n,2).
    pub total: u64,
    pub ratio: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    /// Match probability per cut size q = 1..=n/2.
    pub match_probabilities: Vec<f64>,
    pub abundance_estimate: f64,
    /// Wall time of the exact count in milliseconds. Informational only;
    /// every other field is deterministic across runs and thread counts.
    pub wall_ms: u128,
}

/// Run the exact labeled LR count for `n` (2..=7) and package it with the
/// analytic estimates for the same `n`.
pub fn count_lr_report(n: usize) -> Result<CensusReport> {
    let start = Instant::now();
    let lr_count = graph::count_lr(n)?;
    let wall_ms = start.elapsed().as_millis();
    let total = 1u64 << (n * (n - 1) / 2);
    let (ratio_lower, ratio_upper) = ratio_bounds(n)?;
    let match_probabilities = (1..=n / 2)
        .map(|q| match_probability(n, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(CensusReport {
        n,
        lr_count,
        total,
        ratio: lr_count as f64 / total as f64,
        ratio_lower,
        ratio_upper,
        match_probabilities,
        abundance_estimate: abundance_estimate(n)?,
        wall_ms,
    })
}

/// All isomorphism classes of connected graphs with 1..=max_n vertices,
/// grouped by vertex count (`result[k]` holds the classes on k+1 vertices,
/// sorted).
///
/// Classes are grown incrementally: every connected graph on n vertices has a
/// non-cut vertex, so it arises from a connected graph on n - 1 vertices by
/// attaching one vertex with a nonempty neighbor set. Extending each
/// (n-1)-class representative by every nonempty mask therefore reaches every
/// n-class.
pub fn connected_classes(max_n: usize) -> Result<Vec<Vec<CanonicalForm>>> {
    if max_n == 0 || max_n > MAX_CLASS_VERTICES {
        return Err(Error::Invalid(format!(
            "class enumeration supports 1..={MAX_CLASS_VERTICES} vertices, got {max_n}"
        )));
    }
    let mut levels: Vec<Vec<CanonicalForm>> = vec![vec![canonical(&Graph::new(1)?)?]];
    for n in 2..=max_n {
        let mut set: HashSet<CanonicalForm> = HashSet::new();
        for parent in &levels[n - 2] {
            for mask in 1u32..(1 << (n - 1)) {
                let mut g = Graph::new(n)?;
                for &(u, v) in &parent.edges {
                    g.add_edge(u, v)?;
                }
                for u in 0..n - 1 {
                    if mask >> u & 1 == 1 {
                        g.add_edge(u, n - 1)?;
                    }
                }
                set.insert(canonical(&g)?);
            }
        }
        let mut level: Vec<CanonicalForm> = set.into_iter().collect();
        level.sort();
        levels.push(level);
    }
    Ok(levels)
}

/// Union-find with path halving; small and allocation-free after creation.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Result of sweeping every local-complementation orbit for an LR member.
#[derive(Clone, Debug)]
pub struct CoverageReport {
    pub max_n: usize,
    /// Connected classes examined (single-vertex graph exempt: it has no
    /// bipartition, so the LR predicate is vacuous for it).
    pub classes_checked: usize,
    /// Number of distinct LC orbits among the examined classes.
    pub orbit_count: usize,
    /// Classes whose entire LC orbit contains no LR graph.
    pub violators: Vec<CanonicalForm>,
}

/// For every isomorphism class of connected graphs on 2..=max_n vertices,
/// check that its local-complementation orbit contains an LR graph.
///
/// Orbits are computed in class space: local complementation commutes with
/// relabeling, so orbits are unions of isomorphism classes and a union-find
/// over LC images of one representative per class closes them exactly. Every
/// LC image must already appear in the class table; a miss would mean the
/// incremental enumeration is incomplete and is reported as an error.
pub fn lc_lr_coverage(max_n: usize) -> Result<CoverageReport> {
    if max_n < 2 {
        return Err(Error::Invalid(format!(
            "coverage sweep needs max_n >= 2, got {max_n}"
        )));
    }
    let levels = connected_classes(max_n)?;
    let mut classes_checked = 0;
    let mut orbit_count = 0;
    let mut violators = Vec::new();
    for n in 2..=max_n {
        let classes = &levels[n - 1];
        let index: HashMap<&CanonicalForm, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, form)| (form, i))
            .collect();
        let mut dsu = Dsu::new(classes.len());
        let mut lr = vec![false; classes.len()];
        for (i, form) in classes.iter().enumerate() {
            let g = Graph::from_edges(n, &form.edges)?;
            lr[i] = is_lr(&g).is_some();
            for v in 0..n {
                let image = canonical(&g.local_complement(v)?)?;
                let j = *index.get(&image).ok_or_else(|| {
                    Error::Invalid(
                        "local complementation produced a class missing from the table".into(),
                    )
                })?;
                dsu.union(i, j);
            }
        }
        let mut covered: HashMap<usize, bool> = HashMap::new();
        for i in 0..classes.len() {
            let root = dsu.find(i);
            let entry = covered.entry(root).or_insert(false);
            *entry |= lr[i];
        }
        orbit_count += covered.len();
        for (i, form) in classes.iter().enumerate() {
            let root = dsu.find(i);
            if !covered[&root] {
                violators.push(form.clone());
            }
        }
        classes_checked += classes.len();
    }
    Ok(CoverageReport {
        max_n,
        classes_checked,
        orbit_count,
        violators,
    })
}

/// Connected isomorphism classes with maximum degree at most 3 that are not
/// LR, on 2..=max_n vertices, sorted by vertex count then canonical form.
/// (The single-vertex graph is exempt for the same reason as in
/// [`lc_lr_coverage`].)
pub fn degree3_nonlr_catalog(max_n: usize) -> Result<Vec<CanonicalForm>> {
    if max_n < 2 {
        return Err(Error::Invalid(format!(
            "catalog sweep needs max_n >= 2, got {max_n}"
        )));
    }
    let levels = connected_classes(max_n)?;
    let mut out = Vec::new();
    for n in 2..=max_n {
        for form in &levels[n - 1] {
            let g = Graph::from_edges(n, &form.edges)?;
            if g.max_degree() <= 3 && is_lr(&g).is_none() {
                out.push(form.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_vertex_cut_probability_is_exact() {
        for n in 3..=12 {
            let p = match_probability(n, 1).unwrap();
            // Integer numerator over a power of two: exact in f64.
            assert_eq!(p * 2f64.powi((n - 1) as i32), (n - 1) as f64);
        }
        assert_eq!(match_probability(3, 1).unwrap(), 0.5);
    }

    #[test]
    fn match_probability_counts_nonempty_matchings() {
        // n=4, q=2: matchings of size 1 (4 ways) and size 2 (2 ways) over
        // 2^4 bond patterns; the empty pattern is excluded by convention.
        assert_eq!(match_probability(4, 2).unwrap(), 6.0 / 16.0);
        assert!(match_probability(4, 3).is_err());
        assert!(match_probability(4, 0).is_err());
    }

    #[test]
    fn partition_probability_matches_direct_formula() {
        let p = match_probability(4, 1).unwrap();
        let expected = 1.0 - (1.0 - p).powi(4);
        let got = any_partition_probability(4, 1).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn abundance_estimate_is_a_probability() {
        for n in 3..=10 {
            let est = abundance_estimate(n).unwrap();
            assert!(est > 0.0 && est < 1.0, "n={n} est={est}");
        }
    }

    #[test]
    fn ratio_bounds_reported_even_when_trivial() {
        let (lo, hi) = ratio_bounds(5).unwrap();
        assert!((lo - 4.0 / 16.0).abs() < 1e-15);
        assert!((hi - 125.0 / 32.0).abs() < 1e-13);
        assert!(hi > 1.0, "small-n upper bound exceeds 1 and is kept as-is");
    }

    #[test]
    fn labeled_counts_match_small_table() {
        for (n, expected, total) in [(3, 7, 8u64), (4, 53, 64), (5, 788, 1024)] {
            let report = count_lr_report(n).unwrap();
            assert_eq!(report.lr_count, expected, "n={n}");
            assert_eq!(report.total, total, "n={n}");
            assert!(report.ratio > report.ratio_lower);
        }
    }

    #[test]
    fn labeled_count_is_thread_invariant() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| graph::count_lr(5).unwrap())
        };
        assert_eq!(run(1), 788);
        assert_eq!(run(4), 788);
    }

    #[test]
    fn connected_class_counts_match_known_sequence() {
        let levels = connected_classes(7).unwrap();
        let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112, 853]);
    }

    #[test]
    fn coverage_holds_through_six_vertices() {
        let report = lc_lr_coverage(6).unwrap();
        assert_eq!(report.classes_checked, 1 + 2 + 6 + 21 + 112);
        assert!(report.violators.is_empty());
        assert!(report.orbit_count > 0);
    }

    #[test]
    fn triangle_orbit_reaches_a_path() {
        // The triangle itself is not LR, but one local complementation turns
        // it into the 3-path, which is.
        let triangle = graph::complete(3).unwrap();
        assert!(is_lr(&triangle).is_none());
        let path = triangle.local_complement(0).unwrap();
        assert!(is_lr(&path).is_some());
    }

    #[test]
    fn degree3_catalog_is_the_known_eight() {
        let catalog = degree3_nonlr_catalog(7).unwrap();
        assert_eq!(catalog.len(), 8);
        let up_to_six = catalog.iter().filter(|form| form.n <= 6).count();
        assert_eq!(up_to_six, 7);

        let triangle = canonical(&graph::complete(3).unwrap()).unwrap();
        let k4 = canonical(&graph::complete(4).unwrap()).unwrap();
        assert!(catalog.contains(&triangle));
        assert!(catalog.contains(&k4));

        let seven_edges = [
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 3),
            (1, 5),
            (1, 6),
            (2, 3),
            (2, 5),
            (2, 6),
            (3, 4),
        ];
        let seven = canonical(&Graph::from_edges(7, &seven_edges).unwrap()).unwrap();
        assert!(catalog.contains(&seven), "7-vertex member missing");
    }

    #[test]
    fn sampled_lr_witnesses_validate() {
        let mut rng = StdRng::seed_from_u64(42);
        for n in 3..=6 {
            let pairs = graph::edge_order(n);
            let total = 1u64 << pairs.len();
            for _ in 0..2500 {
                let code = rng.gen_range(0..total);
                let g = graph::decode_graph(n, &pairs, code);
                if let Some(bp) = is_lr(&g) {
                    let mask = bp.mask;
                    assert!(mask & 1 == 1);
                    assert!(mask.count_ones() < n as u32);
                    for v in 0..n {
                        let other = if mask >> v & 1 == 1 {
                            !mask
                        } else {
                            mask
                        };
                        let crossing = (g.neighbors(v) & other).count_ones();
                        assert!(crossing <= 1, "witness fails at vertex {v}");
                    }
                }
            }
        }
    }
}
