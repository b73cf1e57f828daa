//! The Benaloh–Leichter generalized secret-sharing scheme.
//!
//! Sharing recurses over the formula: an OR node passes the current secret
//! unchanged to every child, an AND node splits it into uniform summands
//! (draw all but the last, solve for the last), and a variable leaf records
//! the current value as that occurrence's share. This module doubles as the
//! correctness and secrecy oracle for the master-key scheme.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::crypto::ScalarRng;
use crate::formula::{AddressedFormula, AttributeId, FormulaNode};

/// One share record, keyed by `(attr, occurrence)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Share {
    pub attr: AttributeId,
    pub occurrence: u32,
    pub address: u32,
    pub value: BigUint,
}

/// A full sharing: the formula plus one share per variable leaf.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sharing {
    pub formula: AddressedFormula,
    pub q: BigUint,
    pub shares: Vec<Share>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SsError {
    /// The attribute set does not satisfy the formula.
    NotSatisfied,
    /// A leaf's share is missing from the sharing record.
    MissingShare(AttributeId, u32),
}

impl fmt::Display for SsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SsError::NotSatisfied => write!(f, "attribute set does not satisfy the formula"),
            SsError::MissingShare(attr, j) => write!(f, "missing share for {attr} occurrence {j}"),
        }
    }
}

impl core::error::Error for SsError {}

/// Shares `s` across `f` per the `$(s, φ)` rules.
pub fn share_standard(
    s: &BigUint,
    f: &AddressedFormula,
    q: &BigUint,
    rng: &mut dyn ScalarRng,
) -> Sharing {
    let mut shares = Vec::with_capacity(f.size());
    share_node(&(s % q), f.root(), q, rng, &mut shares);
    Sharing {
        formula: f.clone(),
        q: q.clone(),
        shares,
    }
}

fn share_node(
    s: &BigUint,
    node: &FormulaNode,
    q: &BigUint,
    rng: &mut dyn ScalarRng,
    out: &mut Vec<Share>,
) {
    match node {
        FormulaNode::Var(v) => out.push(Share {
            attr: v.attr.clone(),
            occurrence: v.occurrence,
            address: v.address,
            value: s.clone(),
        }),
        FormulaNode::Y(_) => unreachable!("standard scheme formulas carry no Y-leaves"),
        FormulaNode::Or(cs) => {
            for c in cs {
                share_node(s, c, q, rng, out);
            }
        }
        FormulaNode::And(cs) => {
            // Draw s_1..s_{n-1} uniformly, set s_n = s - sum(s_i) mod q.
            let mut sum = BigUint::zero();
            for c in &cs[..cs.len() - 1] {
                let si = rng.next_scalar(q);
                sum = (sum + &si) % q;
                share_node(&si, c, q, rng, out);
            }
            let last = (s + q - sum) % q;
            share_node(&last, cs.last().unwrap(), q, rng, out);
        }
    }
}

/// Reconstructs the secret when `attrs` satisfies the formula; OR picks the
/// leftmost satisfied child (any satisfied child yields the same value).
pub fn reconstruct_standard(
    sharing: &Sharing,
    attrs: &BTreeSet<AttributeId>,
) -> Result<BigUint, SsError> {
    let by_leaf: BTreeMap<(&AttributeId, u32), &BigUint> = sharing
        .shares
        .iter()
        .map(|sh| ((&sh.attr, sh.occurrence), &sh.value))
        .collect();
    match node_value(sharing.formula.root(), attrs, &by_leaf, &sharing.q)? {
        Some(v) => Ok(v),
        None => Err(SsError::NotSatisfied),
    }
}

fn node_value(
    node: &FormulaNode,
    attrs: &BTreeSet<AttributeId>,
    by_leaf: &BTreeMap<(&AttributeId, u32), &BigUint>,
    q: &BigUint,
) -> Result<Option<BigUint>, SsError> {
    match node {
        FormulaNode::Var(v) => {
            if !attrs.contains(&v.attr) {
                return Ok(None);
            }
            let value = by_leaf
                .get(&(&v.attr, v.occurrence))
                .ok_or_else(|| SsError::MissingShare(v.attr.clone(), v.occurrence))?;
            Ok(Some((*value).clone()))
        }
        FormulaNode::Y(_) => unreachable!("standard scheme formulas carry no Y-leaves"),
        FormulaNode::Or(cs) => {
            for c in cs {
                if let Some(v) = node_value(c, attrs, by_leaf, q)? {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        }
        FormulaNode::And(cs) => {
            let mut sum = BigUint::zero();
            for c in cs {
                match node_value(c, attrs, by_leaf, q)? {
                    Some(v) => sum = (sum + v) % q,
                    None => return Ok(None),
                }
            }
            Ok(Some(sum))
        }
    }
}
