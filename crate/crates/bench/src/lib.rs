//! Shared fixtures for the benchmarks.

use qcash_core::eavesdrop::FakeSignal;
use qcash_core::field::{make_shares, precompute_cohort, SecretKey};
use qcash_core::rng;
use qcash_core::{Banknote, Gf2n, PrecomputedShare, TrojanState, Variant};

/// Deterministic field operands for an `N = 3m` field.
pub fn field_operands(m: usize, count: usize) -> (Gf2n, Vec<(u64, u64)>) {
    let field = Gf2n::for_pairs(m).expect("supported degree");
    let mut r = rng::seeded(1);
    let ops = (0..count)
        .map(|_| (field.random(&mut r).bits(), field.random(&mut r).bits()))
        .collect();
    (field, ops)
}

pub fn probe(complex: bool) -> FakeSignal {
    FakeSignal::random(complex, &mut rng::seeded(2))
}

pub fn trojan_state(m: usize) -> TrojanState {
    TrojanState::random(m, true, &mut rng::seeded(3)).expect("valid size")
}

/// An issued note together with a different checking cohort.
pub struct RoundTrip {
    pub issuers: Vec<PrecomputedShare>,
    pub checkers: Vec<PrecomputedShare>,
    pub m: usize,
    pub variant: Variant,
}

pub fn round_trip(t: usize, n: usize, m: usize) -> RoundTrip {
    let mut r = rng::seeded(4);
    let key = SecretKey::random(m, &mut r).expect("m >= 1");
    let set = make_shares(&key, "bench", t, n, &mut r).expect("valid threshold");
    let issuers = precompute_cohort(&set, &(1..=t).collect::<Vec<_>>()).expect("cohort");
    let checkers = precompute_cohort(&set, &(n + 1 - t..=n).collect::<Vec<_>>()).expect("cohort");
    RoundTrip {
        issuers,
        checkers,
        m,
        variant: Variant::Xor,
    }
}

impl RoundTrip {
    pub fn issue(&self, seed: u64) -> Banknote {
        qcash_core::protocol::issue(&self.issuers, self.m, self.variant, &mut rng::seeded(seed))
            .expect("honest issue")
    }
}
