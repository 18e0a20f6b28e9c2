//! The reproduction driver: every release criterion as a deterministic,
//! seeded check with one pass/fail line each.
//!
//! `reproduce_all` runs the eleven computational criteria twice and adds a
//! twelfth line confirming that both passes produced byte-identical
//! summaries. All sample counts and tolerances are pinned here, in code.

use crate::dual::{
    dual_norm, equivalent_dual_norm, psubadditivity_check, sandwich_factor,
    superadditivity_check, SolverOptions,
};
use crate::graphs::{
    canonical_interlaced_difference, direct_sum_obstruction_demo, distortion_growth_demo,
    interlaced_difference_norm, lipschitz_constant, GraphMap, PairGuard,
};
use crate::midpoint::{
    inner_ball_certificate, outer_compact_certificate, MidpointQuery, NormKind,
};
use crate::model::{DualFunctional, Exponent, SeqVector};
use crate::pvar::{consecutive_blocks_check, james_norm, james_norm_bruteforce};
use crate::sampling::{
    mix_seed, random_block_family, random_functional, random_preceding_functionals,
    random_preceding_vectors, random_vector, rng_from, tight_direction,
};

const EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

fn ex(p: f64) -> Exponent {
    Exponent::new(p).expect("fixed exponent grid")
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:02} {}: {} — {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

fn seeded(seed: u64, tag: &str, salt: usize) -> u64 {
    mix_seed(seed, tag, [(salt, 0.0)])
}

// 1. Oracle equivalence of the DP norm against exhaustive enumeration.
fn oracle_equivalence(seed: u64) -> CriterionOutcome {
    let mut max_diff = 0.0_f64;
    let mut count = 0usize;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        let mut rng = rng_from(seeded(seed, "oracle-equivalence", pi));
        for _ in 0..200 {
            let x = random_vector(&mut rng, 10, 6, 2.0);
            let dp = james_norm(&x, e).value;
            let brute = james_norm_bruteforce(&x, e, 16).expect("window <= 12").value;
            max_diff = max_diff.max((dp - brute).abs());
            count += 1;
        }
    }
    CriterionOutcome {
        index: 1,
        name: "oracle-equivalence",
        passed: max_diff <= 1e-9,
        detail: format!("max |dp - brute| = {max_diff:.3e} over {count} vectors"),
    }
}

// 2. Pinned norm values for basis vectors, both engines.
fn norm_pins(_seed: u64) -> CriterionOutcome {
    let mut worst = 0.0_f64;
    for &p in &EXPONENTS {
        let e = ex(p);
        let dp0 = james_norm(&SeqVector::unit(0), e).value;
        let bf0 = james_norm_bruteforce(&SeqVector::unit(0), e, 16).unwrap().value;
        worst = worst.max((dp0 - 1.0).abs()).max((bf0 - 1.0).abs());
        let expect = 2.0_f64.powf(1.0 / p);
        for n in [1usize, 3, 7] {
            let x = SeqVector::unit(n);
            let dp = james_norm(&x, e).value;
            let bf = james_norm_bruteforce(&x, e, 16).unwrap().value;
            worst = worst.max((dp - expect).abs()).max((bf - expect).abs());
        }
    }
    CriterionOutcome {
        index: 2,
        name: "norm-pins",
        passed: worst <= 1e-10,
        detail: format!("max deviation from pinned values = {worst:.3e}"),
    }
}

// 3. Consecutive-blocks inequality with the 2^p + 1 constant.
fn blocks_bound(seed: u64) -> CriterionOutcome {
    let mut max_ratio_rel = 0.0_f64;
    let mut all_within = true;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        let mut rng = rng_from(seeded(seed, "blocks-bound", pi));
        for _ in 0..500 {
            let blocks = random_block_family(&mut rng, 5, 3, 2.0);
            let rep = consecutive_blocks_check(&blocks, e).expect("generated families are valid");
            all_within &= rep.within_bound;
            max_ratio_rel = max_ratio_rel.max(rep.ratio / rep.bound);
        }
    }
    CriterionOutcome {
        index: 3,
        name: "consecutive-blocks-bound",
        passed: all_within,
        detail: format!("max observed ratio/bound = {max_ratio_rel:.4} over 1500 families"),
    }
}

// 4. Dual-norm pins for coordinate functionals.
fn dual_norm_pins(seed: u64) -> CriterionOutcome {
    let mut pass = true;
    let mut worst_gap = 0.0_f64;
    let mut worst_lower = f64::INFINITY;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        let opts = SolverOptions::certify_only().with_seed(seeded(seed, "dual-pins", pi));
        for n in 0..=10usize {
            let r = dual_norm(&DualFunctional::unit_star(n), e, &opts).expect("bounds-only");
            worst_lower = worst_lower.min(r.lower);
            pass &= r.lower >= 1.0 - 1e-6;
            if n <= 3 {
                let gap = r.upper - r.lower;
                worst_gap = worst_gap.max(gap);
                pass &= gap <= 1e-2 && r.lower <= 1.0 + 1e-9 && r.upper >= 1.0 - 1e-9;
            }
        }
    }
    CriterionOutcome {
        index: 4,
        name: "dual-norm-pins",
        passed: pass,
        detail: format!("min lower = {worst_lower:.12}, max gap (n<=3) = {worst_gap:.3e}"),
    }
}

// 5. Sandwich between the dual norm and the equivalent dual norm.
fn dual_sandwich(seed: u64) -> CriterionOutcome {
    let mut pass = true;
    let mut worst_margin = f64::INFINITY;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        let factor = sandwich_factor(e);
        let opts = SolverOptions::certify_only().with_seed(seeded(seed, "sandwich", pi));
        let mut rng = rng_from(seeded(seed, "sandwich-gen", pi));
        for _ in 0..200 {
            let f = random_functional(&mut rng, 10, 6, 2.0);
            let d = dual_norm(&f, e, &opts).expect("bounds-only");
            let eq = equivalent_dual_norm(&f, e, &opts).expect("bounds-only");
            let left_ok = d.lower <= eq.value + 1e-9;
            let right_margin = factor * d.upper + 1e-6 - eq.value;
            pass &= left_ok && right_margin >= 0.0;
            worst_margin = worst_margin.min(right_margin / factor.max(1.0));
        }
    }
    CriterionOutcome {
        index: 5,
        name: "dual-sandwich",
        passed: pass,
        detail: format!("600 functionals, min normalized upper margin = {worst_margin:.3e}"),
    }
}

// 6. q-superadditivity of the equivalent dual norm on successive blocks.
fn q_superadditivity(seed: u64) -> CriterionOutcome {
    let mut pass = true;
    let mut worst_slack = f64::INFINITY;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        let opts = SolverOptions::certify_only().with_seed(seeded(seed, "superadd", pi));
        let mut rng = rng_from(seeded(seed, "superadd-gen", pi));
        for _ in 0..200 {
            let (f, g) = random_preceding_functionals(&mut rng, 5, 4, 2.0);
            let rep = superadditivity_check(&f, &g, e, &opts).expect("generated pairs precede");
            pass &= rep.pass;
            worst_slack = worst_slack.min(rep.lhs_pow - rep.rhs_pow + rep.tau);
        }
    }
    CriterionOutcome {
        index: 6,
        name: "q-superadditivity",
        passed: pass,
        detail: format!("600 preceding pairs, min slack = {worst_slack:.3e}"),
    }
}

// 7. p-subadditivity of the equivalent primal norm, within certificates.
fn p_subadditivity(seed: u64) -> CriterionOutcome {
    let mut pass = true;
    let mut reports = 0usize;
    for i in 0..100usize {
        let p = EXPONENTS[i % EXPONENTS.len()];
        let e = ex(p);
        let opts = SolverOptions::certify_only().with_seed(seeded(seed, "psubadd", i));
        let mut rng = rng_from(seeded(seed, "psubadd-gen", i));
        let (x, y) = random_preceding_vectors(&mut rng, 4, 3, 2.0);
        let rep = psubadditivity_check(&x, &y, e, &opts).expect("generated pairs precede");
        // all six bounds must be present and ordered
        let bounds_ok = rep.x_bounds.0 <= rep.x_bounds.1
            && rep.y_bounds.0 <= rep.y_bounds.1
            && rep.sum_bounds.0 <= rep.sum_bounds.1
            && rep.x_bounds.0 >= 0.0
            && rep.y_bounds.0 >= 0.0
            && rep.sum_bounds.0 >= 0.0;
        pass &= rep.pass && bounds_ok;
        reports += 1;
    }
    CriterionOutcome {
        index: 7,
        name: "p-subadditivity",
        passed: pass,
        detail: format!("{reports} preceding pairs, six certified bounds each"),
    }
}

// 8. Midpoint certificates: inner ball (equivalent norm) and outer compact
//    (original norm) over the (p, delta) grid.
fn midpoint_certificates(seed: u64) -> CriterionOutcome {
    let mut violations = 0usize;
    let mut samples = 0usize;
    let mut errors = 0usize;
    for (pi, &p) in EXPONENTS.iter().enumerate() {
        let e = ex(p);
        for (di, &delta) in [0.1, 0.5, 0.9].iter().enumerate() {
            for run in 0..100usize {
                let salt = pi * 1000 + di * 100 + run;
                let mut rng = rng_from(seeded(seed, "midpoint-gen", salt));
                let v = tight_direction(&mut rng, 6);
                let u = random_vector(&mut rng, 6, 3, 1.0);
                let x = &u + &v;
                let y = &u - &v;

                let qi = MidpointQuery::new(x.clone(), y.clone(), delta, NormKind::Equivalent, e)
                    .expect("x != y");
                match inner_ball_certificate(&qi, 100, seeded(seed, "midpoint-inner", salt), None) {
                    Ok(rep) => {
                        samples += rep.samples_tested;
                        violations += rep.violations.len();
                    }
                    Err(_) => errors += 1,
                }

                let qo = MidpointQuery::new(x, y, delta, NormKind::Original, e).expect("x != y");
                match outer_compact_certificate(&qo, 100, seeded(seed, "midpoint-outer", salt), None)
                {
                    Ok(rep) => {
                        samples += rep.samples_tested;
                        violations += rep.violations.len();
                    }
                    Err(_) => errors += 1,
                }
            }
        }
    }
    CriterionOutcome {
        index: 8,
        name: "midpoint-certificates",
        passed: violations == 0 && errors == 0,
        detail: format!("{violations} violations, {errors} errors over {samples} samples"),
    }
}

// 9. Graph pins: Lip(phi) <= 4 and the interlaced displacement norms.
fn graph_pins(_seed: u64) -> CriterionOutcome {
    let guard = PairGuard::default();
    let mut pass = true;
    let mut max_lip = 0.0_f64;
    for &q in &EXPONENTS {
        let e = ex(q);
        for (k, hi) in [(2usize, 8usize), (3, 9)] {
            let gm = GraphMap::phi_map(k, (1..=hi).collect(), e).expect("small ground set");
            let rep = lipschitz_constant(&gm, NormKind::Original, &guard).expect("guard fits");
            max_lip = max_lip.max(rep.value);
            pass &= rep.value <= 4.0;
        }
    }

    let mut max_dev = 0.0_f64;
    for &q in &EXPONENTS {
        let e = ex(q);
        for k in 1..=8usize {
            let closed = interlaced_difference_norm(k, q);
            let diff = canonical_interlaced_difference(k);
            let dp = james_norm(&diff, e).value;
            max_dev = max_dev.max((dp - closed).abs());
            pass &= dp > 2.0 * (2.0 * k as f64 - 1.0).powf(1.0 / q) - 1e-12;
            if k <= 4 {
                let brute = james_norm_bruteforce(&diff, e, 16).expect("window 2k+2 <= 10").value;
                max_dev = max_dev.max((brute - closed).abs());
            }
            // a gapped interlaced pair shares the same displacement norm
            let spread = SeqVector::from_entries(
                (0..2 * k).map(|i| (1 + 2 * i, if i % 2 == 0 { 1.0 } else { -1.0 })),
            );
            max_dev = max_dev.max((james_norm(&spread, e).value - closed).abs());
        }
    }
    pass &= max_dev <= 1e-10;
    CriterionOutcome {
        index: 9,
        name: "graph-pins",
        passed: pass,
        detail: format!("max Lip(phi) = {max_lip:.6}, max norm deviation = {max_dev:.3e}"),
    }
}

// 10. Distortion growth slope estimates 1/p - 1/q.
fn distortion_growth(_seed: u64) -> CriterionOutcome {
    let ks: Vec<usize> = (2..=8).collect();
    let mut pass = true;
    let mut details = Vec::new();
    for (p, q) in [(2.0, 4.0), (1.5, 3.0)] {
        let rep = distortion_growth_demo(p, q, &ks).expect("valid exponents");
        let dev = (rep.slope - rep.expected_slope).abs();
        pass &= dev <= 0.05;
        details.push(format!(
            "(p={p}, q={q}): slope {:.4} vs {:.4}",
            rep.slope, rep.expected_slope
        ));
    }
    CriterionOutcome {
        index: 10,
        name: "distortion-growth",
        passed: pass,
        detail: details.join("; "),
    }
}

// 11. Direct-sum obstruction: the component bound decays, the source
//     separation does not.
fn direct_sum_demo(_seed: u64) -> CriterionOutcome {
    let ks: Vec<usize> = (2..=64).collect();
    let theta = 10.0;
    let rows = direct_sum_obstruction_demo(2.0, 4.0, 3.0, &ks, theta, 0.1, 1.0)
        .expect("parameters ordered");
    let mut pass = true;
    for w in rows.windows(2) {
        pass &= w[1].jq_bound / theta < w[0].jq_bound / theta;
    }
    let min_sep = rows
        .iter()
        .map(|r| r.source_sep_lower / theta)
        .fold(f64::INFINITY, f64::min);
    pass &= min_sep > 0.4;
    let first = rows.first().map(|r| r.jq_bound / theta).unwrap_or(0.0);
    let last = rows.last().map(|r| r.jq_bound / theta).unwrap_or(0.0);
    CriterionOutcome {
        index: 11,
        name: "direct-sum-demo",
        passed: pass,
        detail: format!(
            "per-theta jq bound {first:.4} -> {last:.4} over k=2..64, min per-theta separation {min_sep:.4}"
        ),
    }
}

/// Runs one computational criterion (1..=11) at the given seed.
pub fn run_criterion(index: usize, seed: u64) -> CriterionOutcome {
    match index {
        1 => oracle_equivalence(seed),
        2 => norm_pins(seed),
        3 => blocks_bound(seed),
        4 => dual_norm_pins(seed),
        5 => dual_sandwich(seed),
        6 => q_superadditivity(seed),
        7 => p_subadditivity(seed),
        8 => midpoint_certificates(seed),
        9 => graph_pins(seed),
        10 => distortion_growth(seed),
        11 => direct_sum_demo(seed),
        _ => panic!("criterion index must be 1..=11 (12 is the determinism rerun)"),
    }
}

/// One pass over the computational criteria.
pub fn run_all_once(seed: u64) -> Vec<CriterionOutcome> {
    (1..=11).map(|i| run_criterion(i, seed)).collect()
}

pub fn summary_text(outcomes: &[CriterionOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&o.to_string());
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug)]
pub struct Reproduction {
    pub outcomes: Vec<CriterionOutcome>,
    pub text: String,
    pub all_passed: bool,
}

/// Runs every criterion (the computational ones twice) and appends the
/// determinism line comparing the two passes byte for byte.
pub fn reproduce_all(seed: u64) -> Reproduction {
    let first = run_all_once(seed);
    let second = run_all_once(seed);
    let identical = summary_text(&first) == summary_text(&second);
    let mut outcomes = first;
    outcomes.push(CriterionOutcome {
        index: 12,
        name: "determinism",
        passed: identical,
        detail: if identical {
            "two passes produced byte-identical summaries".to_string()
        } else {
            "summaries differ between passes".to_string()
        },
    });
    let all_passed = outcomes.iter().all(|o| o.passed);
    let mut text = summary_text(&outcomes);
    text.push_str(&format!(
        "criteria passed: {}/{}\n",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    ));
    Reproduction {
        outcomes,
        text,
        all_passed,
    }
}
