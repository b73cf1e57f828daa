//! Exhaustive perfect-secrecy checks on toy parameters.
//!
//! Dealer randomness is injected through `ScalarRng`, and the PRF is a
//! programmable table, so the full joint distribution of an unauthorized
//! coalition's view can be enumerated. Perfect secrecy means the view
//! distribution is identical for every secret (total variation distance
//! exactly zero), which these tests check by comparing count maps.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use mkabe_core::crypto::{Prf, PrfKey, ScalarRng};
use mkabe_core::formula::parse;
use mkabe_core::sss_advanced::{transform, MasterKey};
use mkabe_core::sss_standard::share_standard;
use mkabe_core::AttributeId;

const Q: u32 = 5;

fn big(n: u32) -> BigUint {
    BigUint::from(n)
}

fn attr(a: &str) -> AttributeId {
    AttributeId::new(a).unwrap()
}

/// Replays a fixed list of scalars; panics if the scheme draws more
/// randomness than the enumeration accounts for.
struct ScriptRng {
    values: Vec<u32>,
    next: usize,
}

impl ScriptRng {
    fn new(values: Vec<u32>) -> Self {
        ScriptRng { values, next: 0 }
    }

    fn finished(&self) -> bool {
        self.next == self.values.len()
    }
}

impl ScalarRng for ScriptRng {
    fn next_scalar(&mut self, q: &BigUint) -> BigUint {
        assert_eq!(q, &big(Q));
        let v = self.values[self.next];
        self.next += 1;
        big(v)
    }
}

/// A PRF whose entire function table (restricted to the points the dealer
/// queries) is dictated by the test, keyed by the master-key byte.
struct EnumPrf {
    // (key byte, input) -> output
    table: BTreeMap<(u8, u32), u32>,
}

impl Prf for EnumPrf {
    fn eval(&self, key: &PrfKey, x: &BigUint, q: &BigUint) -> BigUint {
        assert_eq!(q, &big(Q));
        let k = key.as_bytes()[0];
        let x: u32 = x.try_into().unwrap();
        big(*self
            .table
            .get(&(k, x))
            .unwrap_or_else(|| panic!("unplanned PRF query ({k}, {x})")))
    }
}

/// Mixed-radix counter over `Z_Q^n`, used to enumerate randomness.
fn for_each_tuple(n: usize, mut f: impl FnMut(&[u32])) {
    let mut t = vec![0u32; n];
    loop {
        f(&t);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            t[i] += 1;
            if t[i] < Q {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

fn assert_views_identical(per_secret: &[BTreeMap<Vec<u32>, u64>]) {
    let first = &per_secret[0];
    for (s, views) in per_secret.iter().enumerate().skip(1) {
        assert_eq!(
            first, views,
            "view distribution for secret {s} differs from secret 0 \
             (total variation distance is nonzero)"
        );
    }
}

#[test]
fn standard_scheme_unauthorized_views_have_zero_tv_distance() {
    // (A & B) | C over Z_5. The only dealer randomness is the single draw
    // for A's summand. Unauthorized coalitions: {A} and {B} (and their
    // subsets); {A, B} and {C} are authorized.
    let f = parse("(A & B) | C").unwrap();
    let q = big(Q);
    for corrupt in [vec![attr("A")], vec![attr("B")]] {
        let corrupt: BTreeSet<AttributeId> = corrupt.into_iter().collect();
        assert!(!f.evaluate(&corrupt), "coalition must be unauthorized");
        let mut per_secret: Vec<BTreeMap<Vec<u32>, u64>> = vec![BTreeMap::new(); Q as usize];
        for s in 0..Q {
            for_each_tuple(1, |draws| {
                let mut rng = ScriptRng::new(draws.to_vec());
                let sharing = share_standard(&big(s), &f, &q, &mut rng);
                assert!(rng.finished(), "unconsumed scripted randomness");
                // The coalition sees exactly its own shares.
                let view: Vec<u32> = sharing
                    .shares
                    .iter()
                    .filter(|sh| corrupt.contains(&sh.attr))
                    .map(|sh| (&sh.value).try_into().unwrap())
                    .collect();
                *per_secret[s as usize].entry(view).or_insert(0) += 1;
            });
        }
        assert_views_identical(&per_secret);
    }
}

#[test]
fn advanced_scheme_case1_views_have_zero_tv_distance() {
    // (A & B) | C transforms into (A & B & Y1) | (C & Y2) with no dealer
    // randomness beyond the PRF outputs at addresses 0, 1, 2. A corrupt
    // coalition sees its own master keys plus the public y-values; we
    // enumerate all 125 joint PRF tables per secret.
    let f = parse("(A & B) | C").unwrap();
    let q = big(Q);
    let mks: BTreeMap<AttributeId, MasterKey> = [("A", 0u8), ("B", 1), ("C", 2)]
        .into_iter()
        .map(|(a, k)| {
            let a = attr(a);
            (a.clone(), MasterKey { attr: a, key: PrfKey::from_bytes(vec![k]) })
        })
        .collect();
    for corrupt in [vec![attr("A")], vec![attr("B")]] {
        let corrupt: BTreeSet<AttributeId> = corrupt.into_iter().collect();
        let mut per_secret: Vec<BTreeMap<Vec<u32>, u64>> = vec![BTreeMap::new(); Q as usize];
        for s in 0..Q {
            // f_A(0), f_B(1), f_C(2): the three points the dealer queries.
            for_each_tuple(3, |fv| {
                let prf = EnumPrf {
                    table: [((0u8, 0u32), fv[0]), ((1, 1), fv[1]), ((2, 2), fv[2])]
                        .into_iter()
                        .collect(),
                };
                let mut rng = ScriptRng::new(vec![]);
                let tr = transform(&big(s), &f, &mks, &q, &mut rng, &prf).unwrap();
                assert!(rng.finished());
                // View: the coalition's PRF values at every queried point of
                // its own keys, plus all public y-values.
                let mut view: Vec<u32> = vec![];
                for (i, a) in ["A", "B", "C"].iter().enumerate() {
                    if corrupt.contains(&attr(a)) {
                        view.push(fv[i]);
                    }
                }
                for y in tr.modified.y_values() {
                    view.push((&y).try_into().unwrap());
                }
                *per_secret[s as usize].entry(view).or_insert(0) += 1;
            });
        }
        assert_views_identical(&per_secret);
    }
}

#[test]
fn advanced_scheme_case2_views_have_zero_tv_distance() {
    // (A | B) & (C | D): an AND of two OR-subformulas, so the dealer draws
    // one uniform summand and queries four PRF points. 5^5 = 3125 joint
    // outcomes per secret.
    let f = parse("(A | B) & (C | D)").unwrap();
    let q = big(Q);
    let names = ["A", "B", "C", "D"];
    let mks: BTreeMap<AttributeId, MasterKey> = names
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let a = attr(a);
            (a.clone(), MasterKey { attr: a, key: PrfKey::from_bytes(vec![k as u8]) })
        })
        .collect();
    for corrupt in [
        vec![attr("A"), attr("B")],
        vec![attr("C"), attr("D")],
        vec![attr("A")],
        vec![attr("D")],
    ] {
        let corrupt: BTreeSet<AttributeId> = corrupt.into_iter().collect();
        assert!(!f.evaluate(&corrupt), "coalition must be unauthorized");
        let mut per_secret: Vec<BTreeMap<Vec<u32>, u64>> = vec![BTreeMap::new(); Q as usize];
        for s in 0..Q {
            for_each_tuple(5, |t| {
                let (draw, fv) = (t[0], &t[1..]);
                let prf = EnumPrf {
                    table: (0..4u32).map(|i| ((i as u8, i), fv[i as usize])).collect(),
                };
                let mut rng = ScriptRng::new(vec![draw]);
                let tr = transform(&big(s), &f, &mks, &q, &mut rng, &prf).unwrap();
                assert!(rng.finished(), "expected exactly one dealer draw");
                let mut view: Vec<u32> = vec![];
                for (i, a) in names.iter().enumerate() {
                    if corrupt.contains(&attr(a)) {
                        view.push(fv[i]);
                    }
                }
                for y in tr.modified.y_values() {
                    view.push((&y).try_into().unwrap());
                }
                *per_secret[s as usize].entry(view).or_insert(0) += 1;
            });
        }
        assert_views_identical(&per_secret);
    }
}

#[test]
fn authorized_views_do_determine_the_secret() {
    // Sanity check on the methodology: for an authorized coalition the view
    // distributions must differ across secrets, otherwise reconstruction
    // would be impossible.
    let f = parse("(A & B) | C").unwrap();
    let q = big(Q);
    let corrupt: BTreeSet<AttributeId> = [attr("C")].into_iter().collect();
    let mut per_secret: Vec<BTreeMap<Vec<u32>, u64>> = vec![BTreeMap::new(); Q as usize];
    for s in 0..Q {
        for_each_tuple(1, |draws| {
            let mut rng = ScriptRng::new(draws.to_vec());
            let sharing = share_standard(&big(s), &f, &q, &mut rng);
            let view: Vec<u32> = sharing
                .shares
                .iter()
                .filter(|sh| corrupt.contains(&sh.attr))
                .map(|sh| (&sh.value).try_into().unwrap())
                .collect();
            *per_secret[s as usize].entry(view).or_insert(0) += 1;
        });
    }
    for s in 1..Q as usize {
        assert_ne!(per_secret[0], per_secret[s]);
    }
}
