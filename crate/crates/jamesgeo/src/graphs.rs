//! Metric graphs of increasing k-tuples and distortion experiments.
//!
//! `G_k(M)` carries the distance "number of differing coordinates"; the
//! interlaced pairs `I_k` (tuples alternating `n_1 < m_1 < n_2 < m_2 < ...`)
//! are the far pairs that drive the lower bounds. The spike-sum embedding
//! `φ(n̄) = u + θ (2k)^{-1/r} (e_{n_1} + ... + e_{n_k})` sends an interlaced
//! pair to an alternating ±1 spike train, whose `J_q` norm is exactly
//! `(2 + 2^q (2k-1))^{1/q}` — gaps between the spikes do not matter, since
//! visiting an intermediate zero always loses against the direct jump of
//! size 2.
//!
//! Everything is finite and exhaustive here. Searches over pairs are guarded
//! by a pair-count limit (`PairGuard`), and statements whose proofs need an
//! infinite ground set (minimum displacement, finite Ramsey extraction) are
//! reported observationally, never asserted.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dual::{direct_sum_norm, equivalent_primal_upper, gamma_equivalence};
use crate::midpoint::NormKind;
use crate::model::{DirectSumVector, Exponent, GraphVertex, ModelError, SeqVector};
use crate::pvar::james_norm;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertices have different tuple lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("pair search would touch {pairs} pairs, above the guard {guard} (set JAMESGEO_GUARD_OVERRIDE=1 or raise the limit)")]
    PairGuardExceeded { pairs: u128, guard: u128 },
    #[error("no interlaced pair exists (ground set smaller than 2k)")]
    NoInterlacedPair,
    #[error("infeasible target size {target} for ground set of {ground} elements and k = {k}")]
    InfeasibleTarget {
        target: usize,
        ground: usize,
        k: usize,
    },
    #[error("parameter ordering violated: {0}")]
    Parameter(&'static str),
    #[error("graph map table must cover all {expected} vertices of G_k(M), got {got}")]
    IncompleteTable { expected: usize, got: usize },
    #[error("image type does not match the declared target space")]
    MixedImages,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Number of coordinates in which two tuples differ.
pub fn graph_distance(a: &GraphVertex, b: &GraphVertex) -> Result<usize, GraphError> {
    if a.len() != b.len() {
        return Err(GraphError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.indices()
        .iter()
        .zip(b.indices())
        .filter(|(x, y)| x != y)
        .count())
}

/// Strict interlacing `n_1 < m_1 < n_2 < m_2 < ... < n_k < m_k`.
pub fn is_interlaced(a: &GraphVertex, b: &GraphVertex) -> Result<bool, GraphError> {
    if a.len() != b.len() {
        return Err(GraphError::LengthMismatch(a.len(), b.len()));
    }
    let mut prev = None;
    for (&n, &m) in a.indices().iter().zip(b.indices()) {
        if let Some(p) = prev {
            if n <= p {
                return Ok(false);
            }
        }
        if m <= n {
            return Ok(false);
        }
        prev = Some(m);
    }
    Ok(true)
}

/// Spike sum `e_{n_1} + ... + e_{n_k}`.
pub fn phi_unscaled(v: &GraphVertex) -> SeqVector {
    SeqVector::from_entries(v.indices().iter().map(|&n| (n, 1.0)))
}

/// Translated and scaled spike sum `u + θ (2k)^{-1/r} (e_{n_1}+...+e_{n_k})`.
/// With `u = 0` and `θ = (2k)^{1/r}` this reduces to [`phi_unscaled`].
pub fn phi(v: &GraphVertex, base: &SeqVector, theta: f64, r: f64) -> Result<SeqVector, GraphError> {
    if theta <= 0.0 {
        return Err(GraphError::Parameter("theta must be positive"));
    }
    if r <= 1.0 {
        return Err(GraphError::Parameter("exponent r must exceed 1"));
    }
    let k = v.len() as f64;
    let scale = theta * (2.0 * k).powf(-1.0 / r);
    Ok(base + &phi_unscaled(v).scaled(scale))
}

/// Image type of a graph map.
#[derive(Clone, Debug)]
pub enum GraphImage {
    Plain(SeqVector),
    Sum(DirectSumVector),
}

/// Target space of a graph map.
#[derive(Clone, Debug)]
pub enum TargetSpace {
    James(Exponent),
    DirectSum(Vec<Exponent>),
}

/// Guard on exhaustive pair searches. `lifted` disables the limit (the CLI
/// maps JAMESGEO_GUARD_OVERRIDE=1 onto it).
#[derive(Clone, Copy, Debug)]
pub struct PairGuard {
    pub max_pairs: u128,
    pub lifted: bool,
}

impl Default for PairGuard {
    fn default() -> Self {
        PairGuard {
            max_pairs: 100_000,
            lifted: false,
        }
    }
}

impl PairGuard {
    fn check(&self, pairs: u128) -> Result<(), GraphError> {
        if !self.lifted && pairs > self.max_pairs {
            return Err(GraphError::PairGuardExceeded {
                pairs,
                guard: self.max_pairs,
            });
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All strictly increasing k-tuples over `ground`, in lexicographic order.
fn increasing_tuples(ground: &[usize], k: usize) -> Vec<GraphVertex> {
    let n = ground.len();
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(
            GraphVertex::new(idx.iter().map(|&i| ground[i]).collect())
                .expect("ground sorted and distinct"),
        );
        // advance the combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A finite table from the vertices of `G_k(M)` to vectors (or direct-sum
/// vectors), the object of distortion experiments.
#[derive(Clone, Debug)]
pub struct GraphMap {
    k: usize,
    ground: Vec<usize>,
    table: BTreeMap<GraphVertex, GraphImage>,
    target: TargetSpace,
}

impl GraphMap {
    /// Builds a map by evaluating `f` on every vertex of `G_k(M)`.
    pub fn from_fn(
        k: usize,
        ground: Vec<usize>,
        target: TargetSpace,
        f: impl Fn(&GraphVertex) -> GraphImage,
    ) -> Result<Self, GraphError> {
        let mut sorted = ground;
        sorted.sort_unstable();
        sorted.dedup();
        let vertices = increasing_tuples(&sorted, k);
        if vertices.is_empty() {
            return Err(GraphError::InfeasibleTarget {
                target: k,
                ground: sorted.len(),
                k,
            });
        }
        let mut table = BTreeMap::new();
        for v in vertices {
            let img = f(&v);
            match (&img, &target) {
                (GraphImage::Plain(_), TargetSpace::James(_)) => {}
                (GraphImage::Sum(s), TargetSpace::DirectSum(es))
                    if s.components().len() == es.len() => {}
                _ => return Err(GraphError::MixedImages),
            }
            table.insert(v, img);
        }
        Ok(GraphMap {
            k,
            ground: sorted,
            table,
            target,
        })
    }

    /// Pre-validated table (used by the JSON loader).
    pub fn from_table(
        k: usize,
        table: BTreeMap<GraphVertex, GraphImage>,
        target: TargetSpace,
    ) -> Result<Self, GraphError> {
        let mut ground: Vec<usize> = table
            .keys()
            .flat_map(|v| v.indices().iter().copied())
            .collect();
        ground.sort_unstable();
        ground.dedup();
        let expected = binomial(ground.len(), k) as usize;
        if table.len() != expected || table.keys().any(|v| v.len() != k) {
            return Err(GraphError::IncompleteTable {
                expected,
                got: table.len(),
            });
        }
        Ok(GraphMap {
            k,
            ground,
            table,
            target,
        })
    }

    /// The unscaled spike-sum embedding on `G_k(M)` into `J_e`.
    pub fn phi_map(k: usize, ground: Vec<usize>, e: Exponent) -> Result<Self, GraphError> {
        GraphMap::from_fn(k, ground, TargetSpace::James(e), |v| {
            GraphImage::Plain(phi_unscaled(v))
        })
    }

    /// The translated/scaled embedding `u + θ(2k)^{-1/r} Σ e_{n_i}`.
    pub fn phi_map_scaled(
        k: usize,
        ground: Vec<usize>,
        base: &SeqVector,
        theta: f64,
        r: f64,
        e: Exponent,
    ) -> Result<Self, GraphError> {
        if theta <= 0.0 {
            return Err(GraphError::Parameter("theta must be positive"));
        }
        GraphMap::from_fn(k, ground, TargetSpace::James(e), |v| {
            GraphImage::Plain(phi(v, base, theta, r).expect("validated parameters"))
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn vertices(&self) -> impl Iterator<Item = &GraphVertex> {
        self.table.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.table.len()
    }

    pub fn image(&self, v: &GraphVertex) -> Option<&GraphImage> {
        self.table.get(v)
    }

    /// Distance between two images in the target space. For the equivalent
    /// norm this is the certified upper bound (the report side notes it).
    pub fn image_distance(
        &self,
        a: &GraphVertex,
        b: &GraphVertex,
        kind: NormKind,
    ) -> Result<f64, GraphError> {
        let ia = self.table.get(a).ok_or(GraphError::LengthMismatch(0, 0));
        let ib = self.table.get(b).ok_or(GraphError::LengthMismatch(0, 0));
        let (ia, ib) = (ia?, ib?);
        Ok(match (ia, ib) {
            (GraphImage::Plain(x), GraphImage::Plain(y)) => {
                let e = match self.target {
                    TargetSpace::James(e) => e,
                    _ => unreachable!("validated on construction"),
                };
                let d = x - y;
                match kind {
                    NormKind::Original => james_norm(&d, e).value,
                    NormKind::Equivalent => equivalent_primal_upper(&d, e),
                }
            }
            (GraphImage::Sum(x), GraphImage::Sum(y)) => {
                let d = x.sub(y)?;
                match kind {
                    NormKind::Original => direct_sum_norm(&d),
                    NormKind::Equivalent => d
                        .components()
                        .iter()
                        .map(|(e, w)| equivalent_primal_upper(w, *e))
                        .fold(0.0, f64::max),
                }
            }
            _ => return Err(GraphError::MixedImages),
        })
    }
}

/// Exact Lipschitz constant over all vertex pairs, with the witness pair.
#[derive(Clone, Debug)]
pub struct LipschitzReport {
    pub value: f64,
    pub witness: Option<(GraphVertex, GraphVertex)>,
    pub pairs_checked: u128,
    pub norm_kind: NormKind,
}

/// `max over pairs of image distance / graph distance`, exhaustively.
pub fn lipschitz_constant(
    gm: &GraphMap,
    kind: NormKind,
    guard: &PairGuard,
) -> Result<LipschitzReport, GraphError> {
    let n = gm.vertex_count() as u128;
    let pairs = n * (n - 1) / 2;
    guard.check(pairs)?;
    let vertices: Vec<&GraphVertex> = gm.vertices().collect();
    let mut best = 0.0_f64;
    let mut witness = None;
    let mut checked = 0u128;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let d_graph = graph_distance(vertices[i], vertices[j])? as f64;
            let d_img = gm.image_distance(vertices[i], vertices[j], kind)?;
            checked += 1;
            let ratio = d_img / d_graph;
            if ratio > best {
                best = ratio;
                witness = Some((vertices[i].clone(), vertices[j].clone()));
            }
        }
    }
    Ok(LipschitzReport {
        value: best,
        witness,
        pairs_checked: checked,
        norm_kind: kind,
    })
}

/// Minimum image displacement over interlaced pairs, reported against the
/// reference bound `2 Lip(f) k^{1/p}`.
#[derive(Clone, Debug)]
pub struct MindispReport {
    pub min: f64,
    pub argmin: Option<(GraphVertex, GraphVertex)>,
    /// `2 Lip(f) k^{1/p}`
    pub bound: f64,
    pub lipschitz: f64,
    pub pairs_checked: u128,
    pub norm_kind: NormKind,
    /// The bound is proved for infinite ground sets (and a bidual norm whose
    /// extra direction finite supports cannot carry), so it is reported, not
    /// asserted.
    pub observational: &'static str,
}

pub fn interlaced_min_displacement(
    gm: &GraphMap,
    e: Exponent,
    kind: NormKind,
    guard: &PairGuard,
) -> Result<MindispReport, GraphError> {
    let n = gm.vertex_count() as u128;
    guard.check(n * n)?;
    let lip = lipschitz_constant(gm, kind, guard)?;
    let vertices: Vec<&GraphVertex> = gm.vertices().collect();
    let mut min = f64::INFINITY;
    let mut argmin = None;
    let mut checked = 0u128;
    for a in &vertices {
        for b in &vertices {
            if !is_interlaced(a, b)? {
                continue;
            }
            checked += 1;
            let d = gm.image_distance(a, b, kind)?;
            if d < min {
                min = d;
                argmin = Some(((*a).clone(), (*b).clone()));
            }
        }
    }
    if argmin.is_none() {
        return Err(GraphError::NoInterlacedPair);
    }
    let bound = 2.0 * lip.value * (gm.k() as f64).powf(1.0 / e.p());
    Ok(MindispReport {
        min,
        argmin,
        bound,
        lipschitz: lip.value,
        pairs_checked: checked,
        norm_kind: kind,
        observational: "finite ground set, finite-support images only",
    })
}

/// Result of the finite extraction surrogate.
#[derive(Clone, Debug)]
pub struct RamseyReport {
    pub subset: Vec<usize>,
    pub diameter: f64,
    /// Whether the subset search was exhaustive (vs greedy elimination).
    pub exact: bool,
}

fn subset_diameter(
    gm: &GraphMap,
    subset: &[usize],
    kind: NormKind,
) -> Result<f64, GraphError> {
    let vertices: Vec<&GraphVertex> = gm
        .vertices()
        .filter(|v| v.indices().iter().all(|i| subset.contains(i)))
        .collect();
    let mut diam = 0.0_f64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            diam = diam.max(gm.image_distance(vertices[i], vertices[j], kind)?);
        }
    }
    Ok(diam)
}

/// Finds a subset `M'` of the ground set of the given size whose image set
/// has small diameter: exhaustively when `C(|M|, size) <= 10^4`, otherwise by
/// greedy elimination (drop the element whose removal shrinks the diameter
/// most, smallest element on ties).
pub fn ramsey_extract(
    gm: &GraphMap,
    target_size: usize,
    kind: NormKind,
) -> Result<RamseyReport, GraphError> {
    let ground = gm.ground().to_vec();
    if target_size < gm.k() || target_size > ground.len() {
        return Err(GraphError::InfeasibleTarget {
            target: target_size,
            ground: ground.len(),
            k: gm.k(),
        });
    }
    let n_subsets = binomial(ground.len(), target_size);
    if n_subsets <= 10_000 {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for subset in increasing_tuples(&ground, target_size) {
            let d = subset_diameter(gm, subset.indices(), kind)?;
            if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                best = Some((subset.indices().to_vec(), d));
            }
        }
        let (subset, diameter) = best.expect("at least one subset");
        Ok(RamseyReport {
            subset,
            diameter,
            exact: true,
        })
    } else {
        let mut current = ground;
        while current.len() > target_size {
            let mut best_removal: Option<(usize, f64)> = None;
            for &candidate in &current {
                let trimmed: Vec<usize> =
                    current.iter().copied().filter(|&g| g != candidate).collect();
                let d = subset_diameter(gm, &trimmed, kind)?;
                let better = match best_removal {
                    None => true,
                    Some((_, bd)) => d < bd,
                };
                if better {
                    best_removal = Some((candidate, d));
                }
            }
            let (remove, _) = best_removal.expect("nonempty ground set");
            current.retain(|&g| g != remove);
        }
        let diameter = subset_diameter(gm, &current, kind)?;
        Ok(RamseyReport {
            subset: current,
            diameter,
            exact: false,
        })
    }
}

/// The canonical interlaced pair `(1, 3, ..., 2k-1)` vs `(2, 4, ..., 2k)`.
/// All interlaced pairs of unscaled spike sums share their difference norm.
pub fn canonical_interlaced_difference(k: usize) -> SeqVector {
    SeqVector::from_entries((1..=2 * k).map(|i| (i, if i % 2 == 1 { 1.0 } else { -1.0 })))
}

/// Closed form `(2 + 2^q (2k-1))^{1/q}` for the interlaced difference norm.
pub fn interlaced_difference_norm(k: usize, q: f64) -> f64 {
    (2.0 + 2.0_f64.powf(q) * (2.0 * k as f64 - 1.0)).powf(1.0 / q)
}

#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub k: usize,
    pub jp_value: f64,
    pub jq_value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of log(ratio) against log(k); estimates 1/p - 1/q.
    pub slope: f64,
    pub expected_slope: f64,
}

/// Interlaced displacement of the unscaled spike map measured in both `J_p`
/// and `J_q`; the log-log slope of the ratio against k estimates `1/p - 1/q`.
pub fn distortion_growth_demo(p: f64, q: f64, ks: &[usize]) -> Result<GrowthReport, GraphError> {
    let ep = Exponent::new(p).map_err(GraphError::Model)?;
    let eq = Exponent::new(q).map_err(GraphError::Model)?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(GraphError::Parameter("k range must be nonempty and positive"));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let diff = canonical_interlaced_difference(k);
        let jp_value = james_norm(&diff, ep).value;
        let jq_value = james_norm(&diff, eq).value;
        rows.push(GrowthRow {
            k,
            jp_value,
            jq_value,
            ratio: jp_value / jq_value,
        });
    }
    let slope = if rows.len() < 2 {
        0.0
    } else {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.k as f64).ln(), r.ratio.ln()))
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    };
    Ok(GrowthReport {
        rows,
        slope,
        expected_slope: 1.0 / p - 1.0 / q,
    })
}

/// One row of the direct-sum obstruction table.
#[derive(Clone, Debug)]
pub struct SumDemoRow {
    pub k: usize,
    /// `θ (2k)^{-1/r}`, the spike scale.
    pub scale: f64,
    /// `γ_r · scale · 2 (2k-1)^{1/r}`: lower bound on the source separation
    /// of interlaced pairs in the equivalent `J_r` norm.
    pub source_sep_lower: f64,
    /// Same bound with the exact (DP) unscaled displacement instead of the
    /// closed-form lower bound.
    pub source_sep_dp: f64,
    /// `5 C θ (2k)^{-1/r} k^{1/q}`: the interlaced displacement bound for the
    /// `J_q` component.
    pub jq_bound: f64,
    /// `ε θ`, the comparison line of the head component.
    pub eps_theta: f64,
}

/// Quantities behind the direct-sum obstruction (`1 < p < r < q`): as k
/// grows the per-θ `J_q` component bound decays like `k^{1/q - 1/r}` while
/// the per-θ source separation stays bounded below, which is the crossing
/// that forbids the embedding. `c` is the coarse distortion constant of the
/// rescaled map (defaults to 1).
pub fn direct_sum_obstruction_demo(
    p: f64,
    q: f64,
    r: f64,
    ks: &[usize],
    theta: f64,
    eps: f64,
    c: f64,
) -> Result<Vec<SumDemoRow>, GraphError> {
    if !(1.0 < p && p < r && r < q) {
        return Err(GraphError::Parameter("need 1 < p < r < q"));
    }
    if c < 1.0 {
        return Err(GraphError::Parameter("distortion constant c must be >= 1"));
    }
    let er = Exponent::new(r).map_err(GraphError::Model)?;
    let gamma = gamma_equivalence(er);
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 {
            return Err(GraphError::Parameter("k must be positive"));
        }
        let kf = k as f64;
        if theta <= (2.0 * kf).powf(1.0 / r) {
            return Err(GraphError::Parameter("need theta > (2k)^{1/r}"));
        }
        let scale = theta * (2.0 * kf).powf(-1.0 / r);
        let unscaled_dp = james_norm(&canonical_interlaced_difference(k), er).value;
        rows.push(SumDemoRow {
            k,
            scale,
            source_sep_lower: gamma * scale * 2.0 * (2.0 * kf - 1.0).powf(1.0 / r),
            source_sep_dp: gamma * scale * unscaled_dp,
            jq_bound: 5.0 * c * theta * (2.0 * kf).powf(-1.0 / r) * kf.powf(1.0 / q),
            eps_theta: eps * theta,
        });
    }
    Ok(rows)
}
