//! Prime-order multiplicative group arithmetic and PRF instantiations.
//!
//! The group is a Schnorr subgroup: `p = k*q + 1` with `p`, `q` prime and
//! `g = h^((p-1)/q) mod p` a generator of the order-`q` subgroup. Scalars
//! live in `Z_q` and are sampled by rejection so small-modulus exhaustive
//! tests see exactly uniform draws.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::RngCore;
use sha2::{Digest, Sha256};

/// Group description `(p, q, g)` with security parameter `n`
/// (`2^n < q < 2^{n+1}`; relaxed validation for tiny test groups).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    n: u32,
}

/// An element of the order-`q` subgroup of `Z_p^*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct GroupElement(BigUint);

impl GroupElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_value(self) -> BigUint {
        self.0
    }
}

/// Opaque PRF key bytes. For the ABE scheme this is the canonical
/// fixed-width big-endian encoding of a group element; the SS-only scheme
/// uses the same encoding of a scalar below `q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PrfKey(Vec<u8>);

impl PrfKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        PrfKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CryptoError {
    NotPrime(&'static str),
    OrderMismatch,
    InvalidGenerator,
    NotInSubgroup,
    GenerationFailure,
    InvalidParameter(&'static str),
}

impl fmt::Display for CryptoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CryptoError::NotPrime(which) => write!(f, "{which} is not prime"),
            CryptoError::OrderMismatch => write!(f, "q does not divide p-1"),
            CryptoError::InvalidGenerator => write!(f, "g does not generate an order-q subgroup"),
            CryptoError::NotInSubgroup => write!(f, "value is not in the order-q subgroup"),
            CryptoError::GenerationFailure => write!(f, "parameter generation failed"),
            CryptoError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for CryptoError {}

impl GroupParams {
    /// Validates `(p, q, g)`: both prime, `q | p-1`, `g != 1`, `g^q = 1`.
    pub fn new(p: BigUint, q: BigUint, g: BigUint, n: u32) -> Result<Self, CryptoError> {
        if !is_prime(&p) {
            return Err(CryptoError::NotPrime("p"));
        }
        if !is_prime(&q) {
            return Err(CryptoError::NotPrime("q"));
        }
        if !(&p - 1u32).is_multiple_of(&q) {
            return Err(CryptoError::OrderMismatch);
        }
        if g <= BigUint::one() || g >= p || g.modpow(&q, &p) != BigUint::one() {
            return Err(CryptoError::InvalidGenerator);
        }
        Ok(GroupParams { p, q, g, n })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement(self.g.clone())
    }

    /// Deterministically generates a Schnorr group with `q` of bit length
    /// `n + 1` (so `2^n < q < 2^{n+1}`) from `seed`.
    pub fn generate(n: u32, seed: &[u8]) -> Result<Self, CryptoError> {
        if n < 4 {
            return Err(CryptoError::InvalidParameter("n must be at least 4"));
        }
        let mut rng = seeded_rng(&[b"mkabe.params", seed]);
        let qbits = (n + 1) as u64;
        for _ in 0..100_000u32 {
            let mut q = random_bits(&mut rng, qbits);
            q.set_bit(qbits - 1, true);
            q.set_bit(0, true);
            if !is_prime(&q) {
                continue;
            }
            // p = k*q + 1 for even k.
            for k in 1..=4096u32 {
                let p = &q * (2 * k) + 1u32;
                if !is_prime(&p) {
                    continue;
                }
                let exp = (&p - 1u32) / &q;
                for _ in 0..64 {
                    let h = random_below(&mut rng, &p);
                    if h <= BigUint::one() {
                        continue;
                    }
                    let g = h.modpow(&exp, &p);
                    if g != BigUint::one() {
                        return GroupParams::new(p, q, g, n);
                    }
                }
                break;
            }
        }
        Err(CryptoError::GenerationFailure)
    }

    /// Checks subgroup membership and wraps the value.
    pub fn element(&self, v: BigUint) -> Result<GroupElement, CryptoError> {
        if v.is_zero() || v >= self.p || v.modpow(&self.q, &self.p) != BigUint::one() {
            return Err(CryptoError::NotInSubgroup);
        }
        Ok(GroupElement(v))
    }

    pub fn exp(&self, base: &GroupElement, e: &BigUint) -> GroupElement {
        GroupElement(base.0.modpow(e, &self.p))
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.p)
    }

    /// Byte width of the canonical element encoding (byte length of `p`).
    pub fn element_bytes(&self) -> usize {
        ((self.p.bits() + 7) / 8) as usize
    }

    /// Canonical fixed-width big-endian encoding, zero-padded to the byte
    /// length of `p`.
    pub fn encode_element(&self, el: &GroupElement) -> Vec<u8> {
        fixed_width_be(&el.0, self.element_bytes())
    }

    /// PRF key for the ABE scheme: the encoded group element.
    pub fn element_key(&self, el: &GroupElement) -> PrfKey {
        PrfKey(self.encode_element(el))
    }
}

pub(crate) fn fixed_width_be(v: &BigUint, width: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    assert!(raw.len() <= width, "value wider than encoding width");
    let mut out = alloc::vec![0u8; width];
    out[width - raw.len()..].copy_from_slice(&raw);
    out
}

/// Injected scalar-randomness interface. Implemented for every `RngCore`
/// via rejection sampling; tests substitute scripted sequences so dealer
/// randomness can be enumerated exhaustively.
pub trait ScalarRng {
    fn next_scalar(&mut self, q: &BigUint) -> BigUint;
}

impl<R: RngCore> ScalarRng for R {
    fn next_scalar(&mut self, q: &BigUint) -> BigUint {
        random_scalar(self, q)
    }
}

/// Uniform scalar in `[0, q)` by rejection: draw exactly `q.bits()` random
/// bits, retry on `>= q`. No modulo bias.
pub fn random_scalar(rng: &mut dyn RngCore, q: &BigUint) -> BigUint {
    assert!(!q.is_zero());
    if q.is_one() {
        return BigUint::zero();
    }
    let bits = q.bits();
    loop {
        let candidate = random_bits(rng, bits);
        if &candidate < q {
            return candidate;
        }
    }
}

/// Uniform key from a key space of size `q`, encoded fixed-width.
pub fn random_key(rng: &mut dyn RngCore, q: &BigUint) -> PrfKey {
    let width = ((q.bits() + 7) / 8) as usize;
    PrfKey(fixed_width_be(&random_scalar(rng, q), width))
}

fn random_bits(rng: &mut dyn RngCore, bits: u64) -> BigUint {
    let nbytes = ((bits + 7) / 8) as usize;
    let mut buf = alloc::vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = (nbytes as u64) * 8 - bits;
    buf[0] &= 0xffu8 >> excess;
    BigUint::from_bytes_be(&buf)
}

fn random_below(rng: &mut dyn RngCore, bound: &BigUint) -> BigUint {
    random_scalar(rng, bound)
}

/// The PRF family `{f_k : Z_q -> Z_q}` keyed by opaque bytes.
pub trait Prf {
    fn eval(&self, key: &PrfKey, x: &BigUint, q: &BigUint) -> BigUint;
}

/// Production instantiation: counter-mode SHA-256 over
/// `(key || enc_q(x) || counter)`, rejection-sampled into `[0, q)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HashPrf;

impl Prf for HashPrf {
    fn eval(&self, key: &PrfKey, x: &BigUint, q: &BigUint) -> BigUint {
        let width = ((q.bits() + 7) / 8) as usize;
        let x_enc = fixed_width_be(&(x % q), width);
        hash_to_scalar(&[b"mkabe.prf", key.as_bytes(), &x_enc], q)
    }
}

/// Test stub: constant zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPrf;

impl Prf for ZeroPrf {
    fn eval(&self, _key: &PrfKey, _x: &BigUint, _q: &BigUint) -> BigUint {
        BigUint::zero()
    }
}

/// A family of true random functions `Z_q -> Z_q`, one per key, lazily
/// sampled from the seed. Evaluation is a pure function of
/// `(seed, key, x)`, so repeat queries agree and concurrent use needs no
/// coordination.
#[derive(Clone, Debug)]
pub struct TablePrf {
    seed: [u8; 32],
}

impl TablePrf {
    pub fn new(seed: [u8; 32]) -> Self {
        TablePrf { seed }
    }

    pub fn from_rng(rng: &mut dyn RngCore) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        TablePrf { seed }
    }
}

impl Prf for TablePrf {
    fn eval(&self, key: &PrfKey, x: &BigUint, q: &BigUint) -> BigUint {
        let width = ((q.bits() + 7) / 8) as usize;
        let x_enc = fixed_width_be(&(x % q), width);
        hash_to_scalar(&[b"mkabe.table", &self.seed, key.as_bytes(), &x_enc], q)
    }
}

/// Derives a uniform scalar in `[0, q)` from the given byte parts by
/// counter-mode hashing with rejection. Each part is length-prefixed so
/// distinct part lists never collide.
pub fn hash_to_scalar(parts: &[&[u8]], q: &BigUint) -> BigUint {
    assert!(!q.is_zero());
    if q.is_one() {
        return BigUint::zero();
    }
    let bits = q.bits();
    let nbytes = ((bits + 7) / 8) as usize;
    let mut ctr: u32 = 0;
    loop {
        let mut buf = Vec::with_capacity(nbytes);
        let mut block: u32 = 0;
        while buf.len() < nbytes {
            let mut h = Sha256::new();
            for part in parts {
                h.update((part.len() as u64).to_be_bytes());
                h.update(part);
            }
            h.update(ctr.to_be_bytes());
            h.update(block.to_be_bytes());
            let digest = h.finalize();
            let take = core::cmp::min(nbytes - buf.len(), digest.len());
            buf.extend_from_slice(&digest[..take]);
            block += 1;
        }
        let excess = (nbytes as u64) * 8 - bits;
        buf[0] &= 0xffu8 >> excess;
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < q {
            return candidate;
        }
        ctr += 1;
    }
}

/// SHA-256 of the canonical `q`-width encoding of a scalar; used as the
/// optional ciphertext integrity tag.
pub fn scalar_digest(v: &BigUint, q: &BigUint) -> [u8; 32] {
    let width = ((q.bits() + 7) / 8) as usize;
    let mut h = Sha256::new();
    h.update(b"mkabe.tag");
    h.update(fixed_width_be(v, width));
    h.finalize().into()
}

/// ChaCha20 RNG keyed by SHA-256 over the given parts.
pub fn seeded_rng(parts: &[&[u8]]) -> rand_chacha::ChaCha20Rng {
    use rand_core::SeedableRng;
    let mut h = Sha256::new();
    for part in parts {
        h.update((part.len() as u64).to_be_bytes());
        h.update(part);
    }
    let seed: [u8; 32] = h.finalize().into();
    rand_chacha::ChaCha20Rng::from_seed(seed)
}

/// Miller–Rabin with bases derived deterministically from the candidate.
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    const SMALL: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    for sp in SMALL {
        let spb = BigUint::from(sp);
        if n == &spb {
            return true;
        }
        if n.is_multiple_of(&spb) {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let n_bytes = n.to_bytes_be();
    'witness: for i in 0u32..40 {
        // Base in [2, n-2], derived from (n, i).
        let span = n - 3u32;
        let a = hash_to_scalar(&[b"mkabe.mr", &n_bytes, &i.to_be_bytes()], &span) + 2u32;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
