//! The master-key secret-sharing scheme.
//!
//! Each trustee holds a single master key; the share for occurrence
//! `X_{p,j}` is `f_{mk_p}(X_{p,j}.address)`. Since PRF outputs are fixed by
//! the keys, the dealer cannot steer clause sums onto the secret directly;
//! instead the transform `g_s` appends a fictitious-trustee leaf `Y_α` with
//! a public value to every pure-AND clause so that the clause total lands on
//! its sub-secret. The transformed formula (with embedded y-values) is
//! published; reconstruction proceeds exactly as in the standard scheme.
//!
//! Transform cases over a normalized formula:
//! 1. a clause of variables only, `X_1 ∧ … ∧ X_t` (t ≥ 1): append `Y_α`
//!    with `y = s − Σ f_{mk}(addr) mod q` and bump the global counter;
//! 2. an AND of `t ≥ 0` variables and `j ≥ 1` OR-subformulas: draw
//!    `s_1..s_{j−1}` uniformly, solve `s_j = s − Σ f_{mk}(addr) − Σ s_i`,
//!    recurse into each subformula with its `s_i`; no Y at this node;
//! 3. an OR node: recurse with the same `s` into every child; a bare
//!    variable under OR is treated as a one-variable case-1 clause.

use alloc::collections::{BTreeMap, BTreeSet};
use core::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::crypto::{Prf, PrfKey, ScalarRng};
use crate::formula::{
    AddressedFormula, AttributeId, FormulaNode, ModifiedFormula, VarLeaf, YLeaf,
};

/// The single secret value a trustee needs; all shares derive from it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MasterKey {
    pub attr: AttributeId,
    pub key: PrfKey,
}

/// Output of the transform: the published formula and the number of
/// fictitious trustees it gained.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransformResult {
    pub modified: ModifiedFormula,
    pub y_count: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AdvancedError {
    MissingMasterKey(AttributeId),
    /// `derive_share` called with a key for a different attribute.
    AttributeMismatch {
        key_attr: AttributeId,
        leaf_attr: AttributeId,
    },
    /// The transform grew past twice the original size; the input formula
    /// was not normalized.
    SizeExceeded,
    NotSatisfied,
}

impl fmt::Display for AdvancedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdvancedError::MissingMasterKey(a) => write!(f, "no master key for attribute {a}"),
            AdvancedError::AttributeMismatch { key_attr, leaf_attr } => {
                write!(f, "master key for {key_attr} used on a leaf of {leaf_attr}")
            }
            AdvancedError::SizeExceeded => write!(f, "transform exceeded the 2x leaf bound"),
            AdvancedError::NotSatisfied => write!(f, "attribute set does not satisfy the formula"),
        }
    }
}

impl core::error::Error for AdvancedError {}

/// Evaluates `φ' = g_s(φ)`, embedding each `y_α` in its Y-leaf.
pub fn transform(
    s: &BigUint,
    f: &AddressedFormula,
    mks: &BTreeMap<AttributeId, MasterKey>,
    q: &BigUint,
    rng: &mut dyn ScalarRng,
    prf: &dyn Prf,
) -> Result<TransformResult, AdvancedError> {
    let mut ctx = Transform {
        mks,
        q,
        rng,
        prf,
        counter: 1,
    };
    let root = ctx.node(&(s % q), f.root())?;
    let y_count = ctx.counter - 1;
    let modified = ModifiedFormula::from_root_unchecked(root);
    if modified.leaf_count() > 2 * f.size() {
        return Err(AdvancedError::SizeExceeded);
    }
    Ok(TransformResult { modified, y_count })
}

struct Transform<'a> {
    mks: &'a BTreeMap<AttributeId, MasterKey>,
    q: &'a BigUint,
    rng: &'a mut dyn ScalarRng,
    prf: &'a dyn Prf,
    counter: u32,
}

impl Transform<'_> {
    fn node(&mut self, s: &BigUint, node: &FormulaNode) -> Result<FormulaNode, AdvancedError> {
        match node {
            // A lone variable is a one-variable case-1 clause.
            FormulaNode::Var(v) => self.pure_clause(s, core::slice::from_ref(v)),
            FormulaNode::Y(_) => unreachable!("transform input carries no Y-leaves"),
            FormulaNode::Or(cs) => {
                // Case 3: recurse with the same secret into every child.
                let children = cs
                    .iter()
                    .map(|c| self.node(s, c))
                    .collect::<Result<_, _>>()?;
                Ok(FormulaNode::Or(children))
            }
            FormulaNode::And(cs) => {
                let vars: alloc::vec::Vec<&VarLeaf> = cs
                    .iter()
                    .filter_map(|c| match c {
                        FormulaNode::Var(v) => Some(v),
                        _ => None,
                    })
                    .collect();
                let sub_count = cs.len() - vars.len();
                if sub_count == 0 {
                    // Case 1: append Y to the clause.
                    let owned: alloc::vec::Vec<VarLeaf> =
                        vars.into_iter().cloned().collect();
                    return self.pure_clause(s, &owned);
                }
                // Case 2: fixed PRF shares for the variables, fresh uniform
                // sub-secrets for all OR-subformulas but the last, which
                // absorbs the remainder.
                let prf_sum = self.prf_sum(&vars)?;
                let mut drawn = BigUint::zero();
                let mut remaining = sub_count;
                let mut children = alloc::vec::Vec::with_capacity(cs.len());
                for c in cs {
                    match c {
                        FormulaNode::Var(v) => children.push(FormulaNode::Var(v.clone())),
                        sub => {
                            remaining -= 1;
                            let si = if remaining == 0 {
                                (s + self.q + self.q - &prf_sum - &drawn) % self.q
                            } else {
                                let si = self.rng.next_scalar(self.q);
                                drawn = (drawn + &si) % self.q;
                                si
                            };
                            children.push(self.node(&si, sub)?);
                        }
                    }
                }
                Ok(FormulaNode::And(children))
            }
        }
    }

    fn prf_sum(&self, vars: &[&VarLeaf]) -> Result<BigUint, AdvancedError> {
        let mut sum = BigUint::zero();
        for v in vars {
            let mk = self
                .mks
                .get(&v.attr)
                .ok_or_else(|| AdvancedError::MissingMasterKey(v.attr.clone()))?;
            let share = self.prf.eval(&mk.key, &BigUint::from(v.address), self.q);
            sum = (sum + share) % self.q;
        }
        Ok(sum)
    }

    fn pure_clause(&mut self, s: &BigUint, vars: &[VarLeaf]) -> Result<FormulaNode, AdvancedError> {
        let refs: alloc::vec::Vec<&VarLeaf> = vars.iter().collect();
        let prf_sum = self.prf_sum(&refs)?;
        let y = (s + self.q - prf_sum) % self.q;
        let index = self.counter;
        self.counter += 1;
        let mut children: alloc::vec::Vec<FormulaNode> =
            vars.iter().cloned().map(FormulaNode::Var).collect();
        children.push(FormulaNode::Y(YLeaf { index, value: y }));
        Ok(FormulaNode::And(children))
    }
}

/// `s_{p,j} = f_{mk_p}(X_{p,j}.address)`.
pub fn derive_share(
    mk: &MasterKey,
    leaf: &VarLeaf,
    q: &BigUint,
    prf: &dyn Prf,
) -> Result<BigUint, AdvancedError> {
    if mk.attr != leaf.attr {
        return Err(AdvancedError::AttributeMismatch {
            key_attr: mk.attr.clone(),
            leaf_attr: leaf.attr.clone(),
        });
    }
    Ok(prf.eval(&mk.key, &BigUint::from(leaf.address), q))
}

/// Reconstructs the secret from the published formula, the party's master
/// keys and the embedded public y-values.
pub fn reconstruct_advanced(
    modified: &ModifiedFormula,
    mks: &BTreeMap<AttributeId, MasterKey>,
    attrs: &BTreeSet<AttributeId>,
    q: &BigUint,
    prf: &dyn Prf,
) -> Result<BigUint, AdvancedError> {
    match node_value(modified.root(), mks, attrs, q, prf)? {
        Some(v) => Ok(v),
        None => Err(AdvancedError::NotSatisfied),
    }
}

fn node_value(
    node: &FormulaNode,
    mks: &BTreeMap<AttributeId, MasterKey>,
    attrs: &BTreeSet<AttributeId>,
    q: &BigUint,
    prf: &dyn Prf,
) -> Result<Option<BigUint>, AdvancedError> {
    match node {
        FormulaNode::Y(y) => Ok(Some(y.value.clone() % q)),
        FormulaNode::Var(v) => {
            if !attrs.contains(&v.attr) {
                return Ok(None);
            }
            let mk = mks
                .get(&v.attr)
                .ok_or_else(|| AdvancedError::MissingMasterKey(v.attr.clone()))?;
            Ok(Some(derive_share(mk, v, q, prf)?))
        }
        FormulaNode::Or(cs) => {
            for c in cs {
                if let Some(v) = node_value(c, mks, attrs, q, prf)? {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        }
        FormulaNode::And(cs) => {
            let mut sum = BigUint::zero();
            for c in cs {
                match node_value(c, mks, attrs, q, prf)? {
                    Some(v) => sum = (sum + v) % q,
                    None => return Ok(None),
                }
            }
            Ok(Some(sum))
        }
    }
}
