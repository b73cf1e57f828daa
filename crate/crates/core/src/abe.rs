//! Attribute-based encryption over the master-key sharing scheme.
//!
//! Each attribute community holds one scalar secret key `sk_p` with public
//! key `pk_p = g^{sk_p}`. Encryption draws an ephemeral exponent `e` and
//! derives the community master keys by Diffie–Hellman, `mk_p = pk_p^e`;
//! decryptors recover the same keys as `(g^e)^{sk_p}`. The message hides
//! behind `E' = M + s mod q`, where `s` is shared across the policy formula.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand_core::RngCore;

use crate::crypto::{random_scalar, scalar_digest, GroupElement, GroupParams, Prf};
use crate::formula::{AddressedFormula, AttributeId, ModifiedFormula};
use crate::sss_advanced::{reconstruct_advanced, transform, AdvancedError, MasterKey};

/// One community's keypair; `pk = g^sk`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CommunityKeypair {
    pub attr: AttributeId,
    pub sk: BigUint,
    pub pk: GroupElement,
}

/// Group description plus every community's public key.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PublicParams {
    pub group: GroupParams,
    pub pks: BTreeMap<AttributeId, GroupElement>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ciphertext {
    /// `E' = M + s mod q`.
    pub e_prime: BigUint,
    /// `g^e`.
    pub eph: GroupElement,
    /// `φ' = g_s(φ)` with embedded y-values.
    pub policy: ModifiedFormula,
    /// Optional SHA-256 of the canonical message encoding.
    pub tag: Option<[u8; 32]>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AbeError {
    DuplicateAttribute(AttributeId),
    /// The policy mentions an attribute with no published public key.
    UnknownAttribute(AttributeId),
    NotSatisfied,
    /// Integrity tag mismatch: wrong keys or corrupted ciphertext.
    IntegrityFailure,
    MissingSecretKey(AttributeId),
    Advanced(AdvancedError),
}

impl fmt::Display for AbeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbeError::DuplicateAttribute(a) => write!(f, "duplicate attribute {a}"),
            AbeError::UnknownAttribute(a) => write!(f, "no public key for attribute {a}"),
            AbeError::NotSatisfied => write!(f, "attribute set does not satisfy the policy"),
            AbeError::IntegrityFailure => write!(f, "integrity tag mismatch"),
            AbeError::MissingSecretKey(a) => write!(f, "no secret key for attribute {a}"),
            AbeError::Advanced(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AbeError {}

impl From<AdvancedError> for AbeError {
    fn from(e: AdvancedError) -> Self {
        match e {
            AdvancedError::NotSatisfied => AbeError::NotSatisfied,
            other => AbeError::Advanced(other),
        }
    }
}

/// Generates an independent keypair per community.
pub fn setup(
    attrs: &[AttributeId],
    params: &GroupParams,
    rng: &mut dyn RngCore,
) -> Result<(Vec<CommunityKeypair>, PublicParams), AbeError> {
    let mut pks = BTreeMap::new();
    let mut keypairs = Vec::with_capacity(attrs.len());
    for attr in attrs {
        let sk = random_scalar(rng, params.q());
        let pk = params.exp(&params.generator(), &sk);
        if pks.insert(attr.clone(), pk.clone()).is_some() {
            return Err(AbeError::DuplicateAttribute(attr.clone()));
        }
        keypairs.push(CommunityKeypair {
            attr: attr.clone(),
            sk,
            pk,
        });
    }
    Ok((
        keypairs,
        PublicParams {
            group: params.clone(),
            pks,
        },
    ))
}

/// Encrypts `m ∈ Z_q` under the policy formula `f`.
pub fn encrypt(
    m: &BigUint,
    pp: &PublicParams,
    f: &AddressedFormula,
    rng: &mut dyn RngCore,
    prf: &dyn Prf,
    with_tag: bool,
) -> Result<Ciphertext, AbeError> {
    let q = pp.group.q();
    let s = random_scalar(rng, q);
    encrypt_with_secret(m, &s, pp, f, rng, prf, with_tag)
}

/// Encryption with the shared secret `s` supplied by the caller; the
/// security-game harness needs to pin `s` to a challenge value.
pub fn encrypt_with_secret(
    m: &BigUint,
    s: &BigUint,
    pp: &PublicParams,
    f: &AddressedFormula,
    rng: &mut dyn RngCore,
    prf: &dyn Prf,
    with_tag: bool,
) -> Result<Ciphertext, AbeError> {
    let q = pp.group.q();
    let e = random_scalar(rng, q);
    // Master keys only for attributes the policy actually uses.
    let mut mks = BTreeMap::new();
    for attr in f.attributes() {
        let pk = pp
            .pks
            .get(&attr)
            .ok_or_else(|| AbeError::UnknownAttribute(attr.clone()))?;
        let mk = pp.group.element_key(&pp.group.exp(pk, &e));
        mks.insert(attr.clone(), MasterKey { attr, key: mk });
    }
    let tr = transform(s, f, &mks, q, &mut &mut *rng, prf)?;
    let m = m % q;
    let e_prime = (&m + s) % q;
    let tag = with_tag.then(|| scalar_digest(&m, q));
    Ok(Ciphertext {
        e_prime,
        eph: pp.group.exp(&pp.group.generator(), &e),
        policy: tr.modified,
        tag,
    })
}

/// Decrypts with the secret keys of the communities in `attrs`.
pub fn decrypt(
    ct: &Ciphertext,
    sks: &BTreeMap<AttributeId, BigUint>,
    attrs: &BTreeSet<AttributeId>,
    pp: &PublicParams,
    prf: &dyn Prf,
) -> Result<BigUint, AbeError> {
    let q = pp.group.q();
    // mk_p = (g^e)^{sk_p}, computed lazily for held attributes that the
    // policy mentions.
    let policy_attrs = ct.policy.erase_y().map_err(|_| AbeError::NotSatisfied)?;
    let mut mks = BTreeMap::new();
    for attr in attrs {
        if !policy_attrs.attributes().contains(attr) {
            continue;
        }
        let sk = sks
            .get(attr)
            .ok_or_else(|| AbeError::MissingSecretKey(attr.clone()))?;
        let mk = pp.group.element_key(&pp.group.exp(&ct.eph, sk));
        mks.insert(attr.clone(), MasterKey { attr: attr.clone(), key: mk });
    }
    let s = reconstruct_advanced(&ct.policy, &mks, attrs, q, prf)?;
    let m = (&ct.e_prime + q - s) % q;
    if let Some(tag) = &ct.tag {
        if &scalar_digest(&m, q) != tag {
            return Err(AbeError::IntegrityFailure);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{GroupParams, HashPrf, ZeroPrf};
    use crate::formula::parse;
    use rand_core::SeedableRng;

    fn big(n: u32) -> BigUint {
        BigUint::from(n)
    }

    fn test_group() -> GroupParams {
        GroupParams::new(big(2039), big(1019), big(4), 9).unwrap()
    }

    fn tiny_group() -> GroupParams {
        GroupParams::new(big(11), big(5), big(3), 2).unwrap()
    }

    fn rng() -> rand_chacha::ChaCha20Rng {
        rand_chacha::ChaCha20Rng::seed_from_u64(31)
    }

    fn ids(names: &[&str]) -> Vec<AttributeId> {
        names.iter().map(|n| AttributeId::new(n).unwrap()).collect()
    }

    fn id_set(names: &[&str]) -> BTreeSet<AttributeId> {
        ids(names).into_iter().collect()
    }

    #[test]
    fn setup_counts_and_pk_consistency() {
        let params = test_group();
        let mut r = rng();
        let (kps, pp) = setup(&ids(&["A", "B", "C", "D"]), &params, &mut r).unwrap();
        assert_eq!(pp.pks.len(), 4);
        for kp in &kps {
            assert_eq!(params.exp(&params.generator(), &kp.sk), kp.pk);
            assert_eq!(pp.pks[&kp.attr], kp.pk);
        }
    }

    #[test]
    fn setup_rejects_duplicates() {
        let params = test_group();
        assert!(matches!(
            setup(&ids(&["A", "B", "A"]), &params, &mut rng()),
            Err(AbeError::DuplicateAttribute(a)) if a.as_str() == "A"
        ));
    }

    #[test]
    fn tiny_group_sk2_gives_pk9() {
        let params = tiny_group();
        assert_eq!(params.exp(&params.generator(), &big(2)).value(), &big(9));
    }

    #[test]
    fn round_trip_worked_example() {
        let params = test_group();
        let mut r = rng();
        let (kps, pp) = setup(&ids(&["A", "B", "C", "D"]), &params, &mut r).unwrap();
        let f = parse("(A & B) | (B & C) | (C & D)").unwrap();
        let ct = encrypt(&big(7), &pp, &f, &mut r, &HashPrf, true).unwrap();

        let sks: BTreeMap<AttributeId, BigUint> =
            kps.iter().map(|k| (k.attr.clone(), k.sk.clone())).collect();
        let m = decrypt(&ct, &sks, &id_set(&["A", "B"]), &pp, &HashPrf).unwrap();
        assert_eq!(m, big(7));

        assert!(matches!(
            decrypt(&ct, &sks, &id_set(&["A", "C"]), &pp, &HashPrf),
            Err(AbeError::NotSatisfied)
        ));
    }

    #[test]
    fn forced_zero_secret_degenerate_arithmetic() {
        // With the zero-PRF and s pinned to 0, E' = M.
        let params = test_group();
        let mut r = rng();
        let (_, pp) = setup(&ids(&["A"]), &params, &mut r).unwrap();
        let f = parse("A").unwrap();
        let ct = encrypt_with_secret(
            &BigUint::ZERO,
            &BigUint::ZERO,
            &pp,
            &f,
            &mut r,
            &ZeroPrf,
            false,
        )
        .unwrap();
        assert_eq!(ct.e_prime, BigUint::ZERO);
    }

    #[test]
    fn unknown_attribute_rejected() {
        let params = test_group();
        let mut r = rng();
        let (_, pp) = setup(&ids(&["A", "B"]), &params, &mut r).unwrap();
        let f = parse("A & E").unwrap();
        assert!(matches!(
            encrypt(&big(1), &pp, &f, &mut r, &HashPrf, false),
            Err(AbeError::UnknownAttribute(a)) if a.as_str() == "E"
        ));
    }

    #[test]
    fn dh_key_agreement_both_sides() {
        let params = test_group();
        let mut r = rng();
        let (kps, pp) = setup(&ids(&["A", "B", "C"]), &params, &mut r).unwrap();
        let e = crate::crypto::random_scalar(&mut r, params.q());
        let eph = params.exp(&params.generator(), &e);
        for kp in &kps {
            assert_eq!(params.exp(&pp.pks[&kp.attr], &e), params.exp(&eph, &kp.sk));
        }
    }

    #[test]
    fn key_agreement_exhaustive_tiny() {
        let params = tiny_group();
        let gen = params.generator();
        for sk in 0u32..5 {
            let pk = params.exp(&gen, &big(sk));
            for e in 0u32..5 {
                let eph = params.exp(&gen, &big(e));
                assert_eq!(params.exp(&pk, &big(e)), params.exp(&eph, &big(sk)));
            }
        }
    }

    #[test]
    fn corrupted_ciphertext_fails_integrity() {
        let params = test_group();
        let mut r = rng();
        let (kps, pp) = setup(&ids(&["A", "B"]), &params, &mut r).unwrap();
        let f = parse("A & B").unwrap();
        let mut ct = encrypt(&big(42), &pp, &f, &mut r, &HashPrf, true).unwrap();
        ct.e_prime = (&ct.e_prime + 1u32) % params.q();
        let sks: BTreeMap<AttributeId, BigUint> =
            kps.iter().map(|k| (k.attr.clone(), k.sk.clone())).collect();
        assert!(matches!(
            decrypt(&ct, &sks, &id_set(&["A", "B"]), &pp, &HashPrf),
            Err(AbeError::IntegrityFailure)
        ));
    }

    #[test]
    fn collusion_is_possible_by_pooling_keys() {
        // Two users whose attribute sets individually fail the policy CAN
        // decrypt by pooling secret keys; the scheme is deliberately not
        // collusion resistant.
        let params = test_group();
        let mut r = rng();
        let (kps, pp) = setup(&ids(&["A", "B"]), &params, &mut r).unwrap();
        let f = parse("A & B").unwrap();
        let ct = encrypt(&big(99), &pp, &f, &mut r, &HashPrf, true).unwrap();
        let sks: BTreeMap<AttributeId, BigUint> =
            kps.iter().map(|k| (k.attr.clone(), k.sk.clone())).collect();
        // Individually: NotSatisfied.
        for solo in ["A", "B"] {
            assert!(decrypt(&ct, &sks, &id_set(&[solo]), &pp, &HashPrf).is_err());
        }
        // Pooled: decryption succeeds.
        assert_eq!(
            decrypt(&ct, &sks, &id_set(&["A", "B"]), &pp, &HashPrf).unwrap(),
            big(99)
        );
    }
}
