//! Seeded random generators for vectors, functionals and block families.
//!
//! All randomness in the crate flows through `ChaCha8Rng` instances seeded
//! explicitly; solver-internal streams derive their seed from the base seed
//! plus the canonical bytes of the input, so a sub-problem always sees the
//! same stream no matter which caller produced it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{DualFunctional, SeqVector};

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FNV-1a mix of a base seed, a context tag and canonical (index, coeff)
/// bytes. Stable across runs and platforms.
pub fn mix_seed(base: u64, tag: &str, entries: impl IntoIterator<Item = (usize, f64)>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET ^ base.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut eat = |byte: u8| {
        h ^= byte as u64;
        h = h.wrapping_mul(PRIME);
    };
    for b in tag.bytes() {
        eat(b);
    }
    for (i, v) in entries {
        for b in (i as u64).to_le_bytes() {
            eat(b);
        }
        for b in v.to_bits().to_le_bytes() {
            eat(b);
        }
    }
    h
}

fn coeff(rng: &mut ChaCha8Rng, amp: f64) -> f64 {
    // keep coefficients away from zero so supports are stable
    let mag = rng.gen_range(0.05 * amp..=amp);
    if rng.gen::<bool>() {
        mag
    } else {
        -mag
    }
}

/// Random vector with 1..=max_nnz nonzero entries inside `[0, max_index]`.
pub fn random_vector(rng: &mut ChaCha8Rng, max_index: usize, max_nnz: usize, amp: f64) -> SeqVector {
    let nnz = rng.gen_range(1..=max_nnz.max(1));
    let mut pairs = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        pairs.push((rng.gen_range(0..=max_index), coeff(rng, amp)));
    }
    let x = SeqVector::from_entries(pairs);
    if x.is_zero() {
        // collisions may cancel; place a single safe entry instead
        SeqVector::from_entries([(rng.gen_range(0..=max_index), coeff(rng, amp))])
    } else {
        x
    }
}

pub fn random_functional(
    rng: &mut ChaCha8Rng,
    max_index: usize,
    max_nnz: usize,
    amp: f64,
) -> DualFunctional {
    random_vector(rng, max_index, max_nnz, amp).as_functional()
}

/// A pair `f ≺ g` with a gap of at least one index between the supports.
pub fn random_preceding_functionals(
    rng: &mut ChaCha8Rng,
    span: usize,
    max_nnz: usize,
    amp: f64,
) -> (DualFunctional, DualFunctional) {
    let f = random_functional(rng, span, max_nnz, amp);
    let start = f.max_support().unwrap() + 1 + rng.gen_range(1..=3);
    let g = random_functional(rng, span, max_nnz, amp).as_vector().shifted_up(start);
    (f, g.as_functional())
}

pub fn random_preceding_vectors(
    rng: &mut ChaCha8Rng,
    span: usize,
    max_nnz: usize,
    amp: f64,
) -> (SeqVector, SeqVector) {
    let (f, g) = random_preceding_functionals(rng, span, max_nnz, amp);
    (f.as_vector(), g.as_vector())
}

/// 1..=max_blocks nonzero blocks with consecutive disjoint supports.
pub fn random_block_family(
    rng: &mut ChaCha8Rng,
    max_blocks: usize,
    block_span: usize,
    amp: f64,
) -> Vec<SeqVector> {
    let nblocks = rng.gen_range(1..=max_blocks.max(1));
    let mut blocks = Vec::with_capacity(nblocks);
    let mut cursor = rng.gen_range(0..=2);
    for _ in 0..nblocks {
        let width = rng.gen_range(1..=block_span.max(1));
        let nnz = rng.gen_range(1..=width);
        let mut pairs = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            pairs.push((cursor + rng.gen_range(0..width), coeff(rng, amp)));
        }
        let mut block = SeqVector::from_entries(pairs);
        if block.is_zero() {
            block = SeqVector::from_entries([(cursor, coeff(rng, amp))]);
        }
        blocks.push(block.clone());
        cursor = block.max_support().unwrap() + 1 + rng.gen_range(1..=3);
    }
    blocks
}

/// Directions whose equivalent-norm certificates close to machine precision:
/// single spikes, adjacent same-sign plateaus, and sign-alternating spike
/// trains of equal magnitude. Used by the midpoint certificates' test corpus.
pub fn tight_direction(rng: &mut ChaCha8Rng, max_start: usize) -> SeqVector {
    let start = rng.gen_range(1..=max_start.max(1));
    let amp = rng.gen_range(0.25..=2.0);
    match rng.gen_range(0..3) {
        0 => SeqVector::from_entries([(start, amp)]),
        1 => {
            let len = rng.gen_range(2..=3);
            SeqVector::from_entries((0..len).map(|i| (start + i, amp)))
        }
        _ => {
            let spikes = rng.gen_range(2..=4);
            let mut pairs = Vec::with_capacity(spikes);
            let mut idx = start;
            for i in 0..spikes {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                pairs.push((idx, sign * amp));
                idx += rng.gen_range(1..=3);
            }
            SeqVector::from_entries(pairs)
        }
    }
}
