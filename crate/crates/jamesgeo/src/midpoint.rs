//! Approximate metric midpoint sets and their two-sided descriptions.
//!
//! `Mid(x, y, δ)` is the set of points within `(1+δ) d(x,y)/2` of both `x`
//! and `y`. For the equivalent norm the set contains a ball of the far
//! coordinates (`inner_ball_certificate`), and for the original norm it is
//! contained in a compact head plus a small far-coordinate ball
//! (`outer_compact_certificate`). Both certificates are sampling checks:
//! they draw points that the statements promise to classify and report any
//! violations, using certified bounds in the sound direction throughout
//! (upper bounds on the distances being tested, lower bounds on `d(x, y)`).
//!
//! `midpoint_image_probe` is observational: it hunts for high-stretch pairs
//! of a coarse Lipschitz map and measures how often sampled midpoints land
//! inside the image midpoint set. Existence of a good pair is guaranteed,
//! finding one by finite search is not, so the probe never hard-asserts.

use thiserror::Error;

use crate::dual::{equivalent_primal_norm, equivalent_primal_upper, SolveError, SolverOptions};
use crate::model::{Exponent, ModelError, SeqVector};
use crate::pvar::james_norm;
use crate::sampling::{mix_seed, rng_from};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// The p-variation norm, computed exactly.
    Original,
    /// The equivalent (block-decomposition) norm, handled via certified
    /// intervals.
    Equivalent,
}

#[derive(Debug, Error)]
pub enum MidpointError {
    #[error("x and y must differ (midpoints of a degenerate pair)")]
    DegeneratePair,
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("certificate requires the {expected} norm")]
    WrongNormKind { expected: &'static str },
    #[error("rejection sampler exhausted after {attempts} attempts")]
    SamplerExhausted { attempts: usize },
    #[error("certificate gap too wide: |v| interval ratio {ratio} exceeds the {needed} allowed by lambda")]
    CertificateGap { ratio: f64, needed: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A midpoint-set query: the pair, the error `δ`, and which norm to use.
#[derive(Clone, Debug)]
pub struct MidpointQuery {
    pub x: SeqVector,
    pub y: SeqVector,
    pub delta: f64,
    pub kind: NormKind,
    pub e: Exponent,
}

impl MidpointQuery {
    pub fn new(
        x: SeqVector,
        y: SeqVector,
        delta: f64,
        kind: NormKind,
        e: Exponent,
    ) -> Result<Self, MidpointError> {
        if (&x - &y).is_zero() {
            return Err(MidpointError::DegeneratePair);
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(MidpointError::BadDelta(delta));
        }
        Ok(MidpointQuery {
            x,
            y,
            delta,
            kind,
            e,
        })
    }

    /// Midpoint `(x + y) / 2`.
    pub fn center(&self) -> SeqVector {
        (&self.x + &self.y).scaled(0.5)
    }

    /// Half-difference `(x - y) / 2`.
    pub fn direction(&self) -> SeqVector {
        (&self.x - &self.y).scaled(0.5)
    }
}

/// Certified distance interval in the query's norm.
fn dist_interval(
    q: &MidpointQuery,
    w: &SeqVector,
    opts: &SolverOptions,
) -> Result<(f64, f64), MidpointError> {
    match q.kind {
        NormKind::Original => {
            let v = james_norm(w, q.e).value;
            Ok((v, v))
        }
        NormKind::Equivalent => {
            let r = equivalent_primal_norm(w, q.e, opts)?;
            Ok((r.lower, r.upper))
        }
    }
}

/// Membership test `max(d(x,z), d(y,z)) <= (1+δ) d(x,y)/2`, certified
/// conservatively: the tested distances enter through their upper bounds and
/// `d(x, y)` through its lower bound, so `true` is always sound.
pub fn midpoint_membership(
    q: &MidpointQuery,
    z: &SeqVector,
    opts: &SolverOptions,
) -> Result<bool, MidpointError> {
    let opts = SolverOptions {
        tolerance: f64::INFINITY,
        ..*opts
    };
    let (_, dxz) = dist_interval(q, &(&q.x - z), &opts)?;
    let (_, dyz) = dist_interval(q, &(&q.y - z), &opts)?;
    let (dxy, _) = dist_interval(q, &(&q.x - &q.y), &opts)?;
    Ok(dxz.max(dyz) <= (1.0 + q.delta) * dxy / 2.0 * (1.0 + 1e-12))
}

/// One offending sample with both distances and the allowed radius.
#[derive(Clone, Debug)]
pub struct MidpointViolation {
    pub z: SeqVector,
    pub dist_x: f64,
    pub dist_y: f64,
    pub allowed: f64,
}

/// Result of a sampling certificate run.
#[derive(Clone, Debug)]
pub struct MidpointReport {
    pub samples_tested: usize,
    pub violations: Vec<MidpointViolation>,
    /// Index below which the head coordinates live.
    pub n_used: usize,
    /// Radius of the ball being certified (inner: `δ^{1/p} |v|`; outer: the
    /// far-coordinate bound `2 δ^{1/p} ||v||`).
    pub theta: f64,
}

impl MidpointReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sparse_sample(rng: &mut ChaCha8Rng, lo: usize, hi: usize, max_nnz: usize) -> SeqVector {
    let nnz = rng.gen_range(1..=max_nnz.max(1));
    let mut pairs = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let idx = rng.gen_range(lo..=hi.max(lo));
        let mag = rng.gen_range(0.05..=1.0);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        pairs.push((idx, sign * mag));
    }
    SeqVector::from_entries(pairs)
}

/// Inner-ball certificate for the equivalent norm: points `u + z` with `z`
/// supported beyond `N` and `|z| <= δ^{1/p} |v|` must belong to
/// `Mid_{|.|}(x, y, δ)`.
///
/// `N` is the smallest index with (certified) `|v - v_N| <= λ |v|` and
/// `|v_N|^p >= (1 + λ^p)^{-1} |v|^p`; `λ` defaults to `δ/8`. Samples are
/// scaled so that their certified upper bound equals the target magnitude,
/// which keeps them genuinely inside the promised ball. The first sample is
/// `z = 0`, the second sits exactly on the boundary.
pub fn inner_ball_certificate(
    q: &MidpointQuery,
    samples: usize,
    seed: u64,
    lambda: Option<f64>,
) -> Result<MidpointReport, MidpointError> {
    if q.kind != NormKind::Equivalent {
        return Err(MidpointError::WrongNormKind {
            expected: "equivalent",
        });
    }
    let v = q.direction();
    if v.is_zero() {
        return Err(MidpointError::DegeneratePair);
    }
    let p = q.e.p();
    let lam = lambda.unwrap_or(q.delta / 8.0);
    let opts = SolverOptions::certify_only().with_seed(mix_seed(seed, "midpoint_inner", v.entries()));

    let rv = equivalent_primal_norm(&v, q.e, &opts)?;
    let (l_v, u_v) = (rv.lower, rv.upper);

    let min_s = v.min_support().unwrap();
    let max_s = v.max_support().unwrap();
    let mut n_used = None;
    for n in min_s..=max_s {
        let tail = v.tail_above(n);
        let tail_ok = if tail.is_zero() {
            true
        } else {
            equivalent_primal_upper(&tail, q.e) <= lam * l_v
        };
        if !tail_ok {
            continue;
        }
        let head = v.truncated_above(n);
        if head.is_zero() {
            continue;
        }
        let l_head = equivalent_primal_norm(&head, q.e, &opts)?.lower;
        if l_head.powf(p) * (1.0 + lam.powf(p)) >= u_v.powf(p) {
            n_used = Some(n);
            break;
        }
    }
    let n_used = n_used.ok_or(MidpointError::CertificateGap {
        ratio: u_v / l_v.max(1e-300),
        needed: (1.0 + lam.powf(p)).powf(1.0 / p),
    })?;

    let theta = q.delta.powf(1.0 / p) * l_v;
    let allowed = (1.0 + q.delta) * l_v;
    let mut rng = rng_from(mix_seed(seed, "midpoint_inner_samples", v.entries()));
    let mut violations = Vec::new();
    let mut tested = 0;

    for i in 0..samples {
        let z = if i == 0 {
            SeqVector::zero()
        } else {
            let target = if i == 1 {
                theta
            } else {
                theta * rng.gen_range(0.0..=1.0)
            };
            let raw = sparse_sample(&mut rng, n_used + 1, n_used + 12, 4);
            let u_raw = equivalent_primal_upper(&raw, q.e);
            if u_raw <= 0.0 || target <= 0.0 {
                SeqVector::zero()
            } else {
                raw.scaled(target / u_raw)
            }
        };
        let d_x = equivalent_primal_upper(&(&v - &z), q.e);
        let d_y = equivalent_primal_upper(&(&v + &z), q.e);
        tested += 1;
        if d_x.max(d_y) > allowed * (1.0 + 1e-12) {
            violations.push(MidpointViolation {
                z,
                dist_x: d_x,
                dist_y: d_y,
                allowed,
            });
        }
    }

    Ok(MidpointReport {
        samples_tested: tested,
        violations,
        n_used,
        theta,
    })
}

/// Outer-compact certificate for the original norm: every member `u + z` of
/// `Mid_{||.||}(x, y, δ)` splits as `z = z' + z''` at `N` with
/// `||z'|| <= (1+δ)||v||` (the compact head) and `||z''|| <= 2 δ^{1/p} ||v||`
/// (the far tail).
///
/// `N` is the smallest index with `||v_N||^p >= (1 - ν^p) ||v||^p`; `ν`
/// defaults to `δ/8`. Members are produced by rejection sampling from the
/// ball of radius `(1+δ)||v||` around the center.
pub fn outer_compact_certificate(
    q: &MidpointQuery,
    samples: usize,
    seed: u64,
    nu: Option<f64>,
) -> Result<MidpointReport, MidpointError> {
    if q.kind != NormKind::Original {
        return Err(MidpointError::WrongNormKind {
            expected: "original",
        });
    }
    let v = q.direction();
    if v.is_zero() {
        return Err(MidpointError::DegeneratePair);
    }
    let p = q.e.p();
    let nu = nu.unwrap_or(q.delta / 8.0);
    let nv = james_norm(&v, q.e).value;

    let min_s = v.min_support().unwrap();
    let max_s = v.max_support().unwrap();
    let mut n_used = max_s;
    for n in min_s..=max_s {
        let head = v.truncated_above(n);
        if james_norm(&head, q.e).value.powf(p) >= (1.0 - nu.powf(p)) * nv.powf(p) {
            n_used = n;
            break;
        }
    }

    let radius = (1.0 + q.delta) * nv;
    let tail_bound = 2.0 * q.delta.powf(1.0 / p) * nv;
    let lo = min_s.saturating_sub(2);
    let mut rng = rng_from(mix_seed(seed, "midpoint_outer_samples", v.entries()));
    let mut violations = Vec::new();
    let mut tested = 0;

    for i in 0..samples {
        let z = if i == 0 {
            SeqVector::zero()
        } else {
            // rejection sampling of members from the segment-centered ball
            let mut accepted = None;
            let budget = 100;
            for _ in 0..budget {
                let head_part = if rng.gen::<bool>() {
                    sparse_sample(&mut rng, lo, n_used, 3)
                } else {
                    SeqVector::zero()
                };
                let tail_part = if rng.gen::<bool>() || head_part.is_zero() {
                    sparse_sample(&mut rng, n_used + 1, n_used + 10, 3)
                } else {
                    SeqVector::zero()
                };
                let raw = &head_part + &tail_part;
                if raw.is_zero() {
                    continue;
                }
                let target = radius * rng.gen_range(0.0..=1.0);
                let nraw = james_norm(&raw, q.e).value;
                let cand = raw.scaled(target / nraw);
                let d_x = james_norm(&(&v - &cand), q.e).value;
                let d_y = james_norm(&(&v + &cand), q.e).value;
                if d_x.max(d_y) <= radius * (1.0 + 1e-12) {
                    accepted = Some(cand);
                    break;
                }
            }
            accepted.ok_or(MidpointError::SamplerExhausted { attempts: 100 })?
        };
        let z_head = z.truncated_above(n_used);
        let z_tail = z.tail_above(n_used);
        let head_norm = james_norm(&z_head, q.e).value;
        let tail_norm = james_norm(&z_tail, q.e).value;
        tested += 1;
        if head_norm > radius * (1.0 + 1e-9) || tail_norm > tail_bound * (1.0 + 1e-9) {
            violations.push(MidpointViolation {
                z,
                dist_x: head_norm,
                dist_y: tail_norm,
                allowed: tail_bound,
            });
        }
    }

    Ok(MidpointReport {
        samples_tested: tested,
        violations,
        n_used,
        theta: tail_bound,
    })
}

/// Options for the coarse Lipschitz image probe.
#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    /// Minimum source separation of candidate pairs.
    pub t: f64,
    /// Enlargement of the image midpoint error: `(1+eps) δ`.
    pub eps: f64,
    pub delta: f64,
    pub pair_candidates: usize,
    pub midpoint_samples: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            t: 4.0,
            eps: 0.5,
            delta: 0.25,
            pair_candidates: 200,
            midpoint_samples: 100,
            seed: 0,
        }
    }
}

/// Observational probe report; no hard assertion is attached.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub pair: (SeqVector, SeqVector),
    pub source_separation: f64,
    /// Empirical Lipschitz constant at scale >= t over the sampled pairs.
    pub lip_estimate: f64,
    pub best_stretch: f64,
    pub samples: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub inconclusive: bool,
}

/// Searches pairs `(x, y)` with `||x - y|| > t` of near-maximal stretch under
/// `map`, then samples source midpoints and tests the image inclusion
/// `map(Mid(x, y, δ)) ⊂ Mid(map(x), map(y), (1+eps) δ)` empirically (original
/// norms on both sides).
pub fn midpoint_image_probe(
    map: &dyn Fn(&SeqVector) -> SeqVector,
    source: Exponent,
    target: Exponent,
    opts: &ProbeOptions,
) -> ProbeReport {
    let mut rng = rng_from(mix_seed(opts.seed, "midpoint_probe", [(0usize, opts.t)]));
    let mut best: Option<(SeqVector, SeqVector, f64, f64)> = None;
    let mut lip = 0.0_f64;

    for _ in 0..opts.pair_candidates {
        let x = sparse_sample(&mut rng, 0, 8, 4).scaled(rng.gen_range(0.5..=2.0));
        let dir = sparse_sample(&mut rng, 0, 8, 4);
        let ndir = james_norm(&dir, source).value;
        if ndir <= 0.0 {
            continue;
        }
        let sep = opts.t * rng.gen_range(1.05..=3.0);
        let y = &x + &dir.scaled(sep / ndir);
        let d_src = james_norm(&(&x - &y), source).value;
        if d_src <= opts.t {
            continue;
        }
        let d_tgt = james_norm(&(&map(&x) - &map(&y)), target).value;
        let stretch = d_tgt / d_src;
        lip = lip.max(stretch);
        if best.as_ref().is_none_or(|b| stretch > b.3) {
            best = Some((x, y, d_src, stretch));
        }
    }

    let Some((x, y, d_src, best_stretch)) = best else {
        return ProbeReport {
            pair: (SeqVector::zero(), SeqVector::zero()),
            source_separation: 0.0,
            lip_estimate: 0.0,
            best_stretch: 0.0,
            samples: 0,
            failures: 0,
            failure_rate: 0.0,
            inconclusive: true,
        };
    };
    if best_stretch <= 1e-12 {
        return ProbeReport {
            pair: (x, y),
            source_separation: d_src,
            lip_estimate: lip,
            best_stretch,
            samples: 0,
            failures: 0,
            failure_rate: 0.0,
            inconclusive: true,
        };
    }

    let u = (&x + &y).scaled(0.5);
    let v = (&x - &y).scaled(0.5);
    let nv = james_norm(&v, source).value;
    let radius = (1.0 + opts.delta) * nv;
    let fx = map(&x);
    let fy = map(&y);
    let d_img = james_norm(&(&fx - &fy), target).value;
    let allowed = (1.0 + (1.0 + opts.eps) * opts.delta) * d_img / 2.0;

    let lo = v.min_support().unwrap_or(0).saturating_sub(2);
    let hi = v.max_support().unwrap_or(8) + 6;
    let mut samples = 0;
    let mut failures = 0;
    for _ in 0..opts.midpoint_samples {
        let mut member = None;
        for _ in 0..50 {
            let raw = sparse_sample(&mut rng, lo, hi, 4);
            let nraw = james_norm(&raw, source).value;
            if nraw <= 0.0 {
                continue;
            }
            let cand = raw.scaled(radius * rng.gen_range(0.0..=1.0) / nraw);
            let dxm = james_norm(&(&v - &cand), source).value;
            let dym = james_norm(&(&v + &cand), source).value;
            if dxm.max(dym) <= radius * (1.0 + 1e-12) {
                member = Some(cand);
                break;
            }
        }
        let Some(z) = member else { continue };
        let fm = map(&(&u + &z));
        let dfx = james_norm(&(&fx - &fm), target).value;
        let dfy = james_norm(&(&fy - &fm), target).value;
        samples += 1;
        if dfx.max(dfy) > allowed * (1.0 + 1e-9) {
            failures += 1;
        }
    }

    ProbeReport {
        pair: (x, y),
        source_separation: d_src,
        lip_estimate: lip,
        best_stretch,
        samples,
        failures,
        failure_rate: if samples > 0 {
            failures as f64 / samples as f64
        } else {
            0.0
        },
        inconclusive: samples == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn query(kind: NormKind, delta: f64) -> MidpointQuery {
        // x = u + v, y = u - v with v = e_2
        let u = SeqVector::from_entries([(0, 0.5)]);
        let v = SeqVector::unit(2);
        MidpointQuery::new(&u + &v, &u - &v, delta, kind, ex(2.0)).unwrap()
    }

    #[test]
    fn query_validation() {
        let x = SeqVector::unit(0);
        assert!(matches!(
            MidpointQuery::new(x.clone(), x.clone(), 0.5, NormKind::Original, ex(2.0)),
            Err(MidpointError::DegeneratePair)
        ));
        assert!(matches!(
            MidpointQuery::new(x.clone(), SeqVector::unit(1), 1.0, NormKind::Original, ex(2.0)),
            Err(MidpointError::BadDelta(_))
        ));
    }

    #[test]
    fn exact_center_is_member_for_every_delta() {
        for &delta in &[0.05, 0.1, 0.5, 0.9] {
            for kind in [NormKind::Original, NormKind::Equivalent] {
                let q = query(kind, delta);
                let center = q.center();
                assert!(
                    midpoint_membership(&q, &center, &SolverOptions::certify_only()).unwrap(),
                    "delta={delta} kind={kind:?}"
                );
            }
        }
    }

    #[test]
    fn endpoint_is_not_member() {
        let q = query(NormKind::Original, 0.5);
        let x = q.x.clone();
        assert!(!midpoint_membership(&q, &x, &SolverOptions::certify_only()).unwrap());
        // a far-away point is rejected too
        let far = SeqVector::from_entries([(9, 10.0)]);
        assert!(!midpoint_membership(&q, &far, &SolverOptions::certify_only()).unwrap());
    }

    #[test]
    fn membership_is_scale_equivariant() {
        let q = query(NormKind::Original, 0.3);
        let candidates = [
            q.center(),
            &q.center() + &SeqVector::from_entries([(5, 0.2)]),
            &q.center() + &SeqVector::from_entries([(5, 5.0)]),
        ];
        for c in [0.25, 1.0, 7.5] {
            let qs = MidpointQuery::new(q.x.scaled(c), q.y.scaled(c), q.delta, q.kind, q.e).unwrap();
            for z in &candidates {
                let a = midpoint_membership(&q, z, &SolverOptions::certify_only()).unwrap();
                let b = midpoint_membership(&qs, &z.scaled(c), &SolverOptions::certify_only()).unwrap();
                assert_eq!(a, b, "c={c}");
            }
        }
    }

    #[test]
    fn inner_certificate_spike_direction() {
        let q = query(NormKind::Equivalent, 0.5);
        let report = inner_ball_certificate(&q, 100, 7, None).unwrap();
        assert_eq!(report.samples_tested, 100);
        assert!(report.passed(), "violations: {:?}", report.violations.len());
        assert!(report.theta > 0.0);
    }

    #[test]
    fn inner_certificate_requires_equivalent_norm() {
        let q = query(NormKind::Original, 0.5);
        assert!(matches!(
            inner_ball_certificate(&q, 10, 0, None),
            Err(MidpointError::WrongNormKind { .. })
        ));
    }

    #[test]
    fn outer_certificate_spike_direction() {
        let q = query(NormKind::Original, 0.5);
        let report = outer_compact_certificate(&q, 100, 11, None).unwrap();
        assert_eq!(report.samples_tested, 100);
        assert!(report.passed());
    }

    #[test]
    fn outer_certificate_adversarial_tail() {
        // concentrate z beyond N at the largest magnitude that stays in the
        // midpoint set and confirm the tail bound still holds
        let q = query(NormKind::Original, 0.5);
        let v = q.direction();
        let e = q.e;
        let nv = james_norm(&v, e).value;
        let radius = (1.0 + q.delta) * nv;
        let shape = &SeqVector::unit(5) - &SeqVector::unit(6);
        let nshape = james_norm(&shape, e).value;
        // bisect the largest feasible scale along this tail-only direction
        let (mut lo, mut hi) = (0.0_f64, radius / nshape * 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let z = shape.scaled(mid);
            let inside = james_norm(&(&v - &z), e)
                .value
                .max(james_norm(&(&v + &z), e).value)
                <= radius;
            if inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = shape.scaled(lo);
        let tail_norm = james_norm(&z, e).value;
        let tail_bound = 2.0 * q.delta.powf(1.0 / e.p()) * nv;
        assert!(tail_norm > 0.5 * tail_bound, "stress case should be nontrivial");
        assert!(tail_norm <= tail_bound * (1.0 + 1e-9), "tail bound violated");
    }

    #[test]
    fn probe_identity_never_fails() {
        let report = midpoint_image_probe(
            &|x: &SeqVector| x.clone(),
            ex(2.0),
            ex(2.0),
            &ProbeOptions::default(),
        );
        assert!(!report.inconclusive);
        assert_eq!(report.failures, 0);
        assert!(report.source_separation > 4.0);
    }

    #[test]
    fn probe_homothety_never_fails() {
        let report = midpoint_image_probe(
            &|x: &SeqVector| x.scaled(2.0),
            ex(2.0),
            ex(2.0),
            &ProbeOptions::default(),
        );
        assert_eq!(report.failures, 0);
        assert!((report.best_stretch - 2.0).abs() < 1e-9);
    }

    #[test]
    fn probe_formal_identity_reports() {
        let report = midpoint_image_probe(
            &|x: &SeqVector| x.clone(),
            ex(4.0),
            ex(2.0),
            &ProbeOptions {
                t: 4.0,
                delta: 0.25,
                ..ProbeOptions::default()
            },
        );
        assert!(!report.inconclusive);
        assert!(report.samples > 0);
        assert!(report.failure_rate >= 0.0 && report.failure_rate <= 1.0);
    }
}
