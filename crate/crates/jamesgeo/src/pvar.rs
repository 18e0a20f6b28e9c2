//! The `J_p` norm on finitely supported sequences.
//!
//! For `x` with finite support the supremum of p-variation over all
//! increasing index sequences in ℕ is attained inside the finite window
//! `[0, maxsupp(x) + 1]`: indices beyond the support all carry the value 0,
//! so a single right sentinel suffices, and no index precedes 0. Gap indices
//! inside the window carry the value 0 and *do* participate — a zero between
//! two equal spikes strictly increases the variation. The reduction is
//! lossless, so the dynamic program here is exact, not a heuristic.
//!
//! `james_norm_bruteforce` enumerates every increasing subsequence of the
//! window and exists purely as an independent oracle for the DP.

use crate::model::{precedes, DualFunctional, Exponent, SeqVector};
use thiserror::Error;

/// Largest window (maxsupp + 2) the exhaustive oracle will accept.
pub const DEFAULT_WINDOW_CAP: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum PvarError {
    #[error("window of size {window} exceeds the brute-force cap {cap}")]
    WindowTooLarge { window: usize, cap: usize },
    #[error("operation undefined for the zero vector")]
    ZeroVector,
    #[error("blocks must satisfy precedes pairwise in order (violated at position {position})")]
    PrecedenceViolation { position: usize },
}

/// A norm value together with the increasing index sequence achieving it.
#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub witness: Vec<usize>,
}

/// `|t|^p`. Uses `powf` (exp/log) for non-integer exponents; every tolerance
/// in this crate is stated against its ~1e-12 relative error budget.
#[inline]
pub fn pow_abs(t: f64, p: f64) -> f64 {
    t.abs().powf(p)
}

/// p-variation sum along a given increasing index sequence, reported as the
/// norm-scale value `(sum |x(i_{j+1}) - x(i_j)|^p)^{1/p}`.
pub fn variation_along(x: &SeqVector, e: Exponent, indices: &[usize]) -> f64 {
    let p = e.p();
    let sum: f64 = indices
        .windows(2)
        .map(|w| pow_abs(x.coeff(w[1]) - x.coeff(w[0]), p))
        .sum();
    sum.powf(1.0 / p)
}

fn window_values(x: &SeqVector) -> Vec<f64> {
    // indices 0..=maxsupp+1, gap entries 0, one right sentinel 0
    let top = x.max_support().expect("nonzero vector") + 1;
    let mut w = vec![0.0; top + 1];
    for (i, v) in x.entries() {
        w[i] = v;
    }
    w
}

/// Exact `J_p` norm by dynamic programming over the support window.
///
/// `B[i] = max_{j < i} B[j] + |x(i) - x(j)|^p` with `B[0] = 0`; the answer is
/// `B[maxsupp + 1]^{1/p}`. Ties prefer the latest predecessor, which makes
/// witnesses deterministic and keeps them inside the tightest window (so
/// `e_3` reports `[2, 3, 4]`, not a chain padded with leading zeros).
pub fn james_norm(x: &SeqVector, e: Exponent) -> NormResult {
    if x.is_zero() {
        return NormResult {
            value: 0.0,
            witness: Vec::new(),
        };
    }
    let p = e.p();
    let w = window_values(x);
    let n = w.len();
    let mut best = vec![0.0_f64; n];
    let mut pred = vec![0usize; n];
    for i in 1..n {
        let mut b = f64::NEG_INFINITY;
        let mut arg = 0;
        for j in 0..i {
            let cand = best[j] + pow_abs(w[i] - w[j], p);
            if cand >= b {
                b = cand;
                arg = j;
            }
        }
        best[i] = b;
        pred[i] = arg;
    }
    // The sentinel dominates: extending any chain to it never decreases the sum.
    let end = n - 1;
    let mut witness = vec![end];
    let mut cur = end;
    while best[cur] != 0.0 {
        cur = pred[cur];
        witness.push(cur);
    }
    witness.reverse();
    NormResult {
        value: best[end].powf(1.0 / p),
        witness,
    }
}

/// Exhaustive maximum over all increasing subsequences of the window;
/// bit-identical objective to [`james_norm`]. This is the test oracle.
pub fn james_norm_bruteforce(
    x: &SeqVector,
    e: Exponent,
    window_cap: usize,
) -> Result<NormResult, PvarError> {
    if x.is_zero() {
        return Ok(NormResult {
            value: 0.0,
            witness: Vec::new(),
        });
    }
    let w = window_values(x);
    let n = w.len();
    if n > window_cap {
        return Err(PvarError::WindowTooLarge {
            window: n,
            cap: window_cap,
        });
    }
    let p = e.p();
    let mut best = 0.0_f64;
    let mut best_mask: u32 = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut prev: Option<usize> = None;
        for (i, &wi) in w.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if let Some(j) = prev {
                    sum += pow_abs(wi - w[j], p);
                }
                prev = Some(i);
            }
        }
        if sum > best {
            best = sum;
            best_mask = mask;
        }
    }
    let witness = (0..n).filter(|i| best_mask & (1 << i) != 0).collect();
    Ok(NormResult {
        value: best.powf(1.0 / p),
        witness,
    })
}

/// A norming functional at `x`: `g(x) = ||x||_{J_p}` and `g(y) <= ||y||_{J_p}`
/// for every `y` (so the dual norm of `g` is at most 1).
///
/// Built from the DP witness: differentiate the witness p-variation sum and
/// normalize. With increments `d_j` along the witness and `V = sum |d_j|^p`,
/// the coefficient pattern is `|d_j|^{p-1} sign(d_j) V^{1/p - 1}` applied with
/// opposite signs at the two ends of each increment; Hölder gives the
/// contraction property.
pub fn norm_subgradient(x: &SeqVector, e: Exponent) -> Result<DualFunctional, PvarError> {
    if x.is_zero() {
        return Err(PvarError::ZeroVector);
    }
    let p = e.p();
    let nr = james_norm(x, e);
    let incs: Vec<(usize, usize, f64)> = nr
        .witness
        .windows(2)
        .map(|w| (w[0], w[1], x.coeff(w[1]) - x.coeff(w[0])))
        .collect();
    let v: f64 = incs.iter().map(|&(_, _, d)| pow_abs(d, p)).sum();
    let scale = v.powf(1.0 / p - 1.0);
    let mut pairs = Vec::with_capacity(2 * incs.len());
    for &(a, b, d) in &incs {
        let c = pow_abs(d, p - 1.0) * d.signum() * scale;
        pairs.push((b, c));
        pairs.push((a, -c));
    }
    Ok(DualFunctional::from_entries(pairs))
}

/// Report of the consecutive-blocks inequality
/// `||sum x_i||^p <= (2^p + 1) sum ||x_i||^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlocksReport {
    /// `||sum x_i||^p`
    pub sum_norm_pow: f64,
    /// `sum ||x_i||^p`
    pub blocks_norm_pow: f64,
    pub ratio: f64,
    /// `2^p + 1`
    pub bound: f64,
    pub within_bound: bool,
}

/// Checks the consecutive-blocks inequality on blocks `x_1 ≺ x_2 ≺ ...`.
pub fn consecutive_blocks_check(
    blocks: &[SeqVector],
    e: Exponent,
) -> Result<BlocksReport, PvarError> {
    for (pos, w) in blocks.windows(2).enumerate() {
        match precedes(&w[0], &w[1]) {
            Ok(true) => {}
            _ => return Err(PvarError::PrecedenceViolation { position: pos }),
        }
    }
    if blocks.is_empty() || blocks.iter().any(|b| b.is_zero()) {
        return Err(PvarError::ZeroVector);
    }
    let p = e.p();
    let mut sum = SeqVector::zero();
    let mut blocks_norm_pow = 0.0;
    for b in blocks {
        sum = &sum + b;
        blocks_norm_pow += james_norm(b, e).value.powf(p);
    }
    let sum_norm_pow = james_norm(&sum, e).value.powf(p);
    let ratio = sum_norm_pow / blocks_norm_pow;
    let bound = 2.0_f64.powf(p) + 1.0;
    Ok(BlocksReport {
        sum_norm_pow,
        blocks_norm_pow,
        ratio,
        bound,
        within_bound: ratio <= bound + 1e-9,
    })
}
