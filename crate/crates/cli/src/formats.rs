//! Canonical JSON file formats.
//!
//! Conventions: integers as lowercase big-endian hex without leading zeros
//! ("0" for zero) where the value is a group element or modulus, decimal
//! strings for scalars in share/ciphertext payload positions, compact JSON
//! with fixed key order. Deserialization re-validates every invariant and
//! reports failures with a field path.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use mkabe_core::abe::{Ciphertext, PublicParams};
use mkabe_core::crypto::{GroupParams, PrfKey};
use mkabe_core::formula::{FormulaError, FormulaNode};
use mkabe_core::sss_standard::{Share, Sharing};
use mkabe_core::{AddressedFormula, AttributeId, ModifiedFormula, VarLeaf, YLeaf};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl FormatError {
    fn at(path: &str, msg: impl Into<String>) -> Self {
        FormatError::Invalid { path: path.to_string(), msg: msg.into() }
    }

    fn formula(path: &str, err: FormulaError) -> Self {
        FormatError::Invalid { path: path.to_string(), msg: err.to_string() }
    }
}

pub fn to_hex(v: &BigUint) -> String {
    v.to_str_radix(16)
}

pub fn to_dec(v: &BigUint) -> String {
    v.to_str_radix(10)
}

pub fn from_hex(path: &str, s: &str) -> Result<BigUint, FormatError> {
    if s.is_empty()
        || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        || (s.len() > 1 && s.starts_with('0'))
    {
        return Err(FormatError::at(
            path,
            format!("expected lowercase hex without leading zeros, got {s:?}"),
        ));
    }
    BigUint::from_str_radix(s, 16).map_err(|e| FormatError::at(path, e.to_string()))
}

pub fn from_dec(path: &str, s: &str) -> Result<BigUint, FormatError> {
    if s.is_empty()
        || !s.bytes().all(|b| b.is_ascii_digit())
        || (s.len() > 1 && s.starts_with('0'))
    {
        return Err(FormatError::at(
            path,
            format!("expected a decimal integer without leading zeros, got {s:?}"),
        ));
    }
    BigUint::from_str_radix(s, 10).map_err(|e| FormatError::at(path, e.to_string()))
}

fn attr_id(path: &str, name: &str) -> Result<AttributeId, FormatError> {
    AttributeId::new(name).map_err(|e| FormatError::formula(path, e))
}

// ---------------------------------------------------------------------------
// Formula JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum NodeRepr {
    And { children: Vec<NodeRepr> },
    Or { children: Vec<NodeRepr> },
    Var { attr: String, j: u32, addr: u32 },
    Y { index: u32, value: String },
}

pub fn node_to_repr(node: &FormulaNode) -> NodeRepr {
    match node {
        FormulaNode::And(cs) => NodeRepr::And { children: cs.iter().map(node_to_repr).collect() },
        FormulaNode::Or(cs) => NodeRepr::Or { children: cs.iter().map(node_to_repr).collect() },
        FormulaNode::Var(v) => NodeRepr::Var {
            attr: v.attr.as_str().to_string(),
            j: v.occurrence,
            addr: v.address,
        },
        FormulaNode::Y(y) => NodeRepr::Y { index: y.index, value: to_dec(&y.value) },
    }
}

pub fn repr_to_node(repr: &NodeRepr, path: &str) -> Result<FormulaNode, FormatError> {
    match repr {
        NodeRepr::And { children } => Ok(FormulaNode::And(repr_children(children, path)?)),
        NodeRepr::Or { children } => Ok(FormulaNode::Or(repr_children(children, path)?)),
        NodeRepr::Var { attr, j, addr } => Ok(FormulaNode::Var(VarLeaf {
            attr: attr_id(&format!("{path}.attr"), attr)?,
            occurrence: *j,
            address: *addr,
        })),
        NodeRepr::Y { index, value } => Ok(FormulaNode::Y(YLeaf {
            index: *index,
            value: from_dec(&format!("{path}.value"), value)?,
        })),
    }
}

fn repr_children(children: &[NodeRepr], path: &str) -> Result<Vec<FormulaNode>, FormatError> {
    children
        .iter()
        .enumerate()
        .map(|(i, c)| repr_to_node(c, &format!("{path}.children[{i}]")))
        .collect()
}

pub fn formula_to_json(f: &AddressedFormula) -> String {
    serde_json::to_string(&node_to_repr(f.root())).expect("formula JSON never fails")
}

pub fn formula_from_json(text: &str) -> Result<AddressedFormula, FormatError> {
    let repr: NodeRepr = serde_json::from_str(text)?;
    let node = repr_to_node(&repr, "$")?;
    AddressedFormula::from_root(node).map_err(|e| FormatError::formula("$", e))
}

pub fn modified_to_repr(f: &ModifiedFormula) -> NodeRepr {
    node_to_repr(f.root())
}

pub fn modified_from_repr(repr: &NodeRepr, path: &str) -> Result<ModifiedFormula, FormatError> {
    let node = repr_to_node(repr, path)?;
    ModifiedFormula::from_root(node).map_err(|e| FormatError::formula(path, e))
}

// ---------------------------------------------------------------------------
// Group parameters
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct GroupParamsRepr {
    pub p: String,
    pub q: String,
    pub g: String,
}

pub fn group_to_repr(group: &GroupParams) -> GroupParamsRepr {
    GroupParamsRepr {
        p: to_hex(group.p()),
        q: to_hex(group.q()),
        g: to_hex(group.generator().value()),
    }
}

pub fn group_from_repr(repr: &GroupParamsRepr, path: &str) -> Result<GroupParams, FormatError> {
    let p = from_hex(&format!("{path}.p"), &repr.p)?;
    let q = from_hex(&format!("{path}.q"), &repr.q)?;
    let g = from_hex(&format!("{path}.g"), &repr.g)?;
    let n = (q.bits() as u32).saturating_sub(1);
    GroupParams::new(p, q, g, n).map_err(|e| FormatError::at(path, e.to_string()))
}

pub fn params_to_json(group: &GroupParams) -> String {
    serde_json::to_string(&group_to_repr(group)).expect("params JSON never fails")
}

pub fn params_from_json(text: &str) -> Result<GroupParams, FormatError> {
    let repr: GroupParamsRepr = serde_json::from_str(text)?;
    group_from_repr(&repr, "$")
}

// ---------------------------------------------------------------------------
// Key files and public parameters
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct KeyFileRepr {
    pub attr: String,
    pub sk: String,
    pub pk: String,
}

pub struct KeyFile {
    pub attr: AttributeId,
    pub sk: BigUint,
    pub pk: BigUint,
}

pub fn key_to_json(attr: &AttributeId, sk: &BigUint, pk: &BigUint) -> String {
    let repr = KeyFileRepr {
        attr: attr.as_str().to_string(),
        sk: to_dec(sk),
        pk: to_hex(pk),
    };
    serde_json::to_string(&repr).expect("key JSON never fails")
}

pub fn key_from_json(text: &str) -> Result<KeyFile, FormatError> {
    let repr: KeyFileRepr = serde_json::from_str(text)?;
    Ok(KeyFile {
        attr: attr_id("$.attr", &repr.attr)?,
        sk: from_dec("$.sk", &repr.sk)?,
        pk: from_hex("$.pk", &repr.pk)?,
    })
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PublicParamsRepr {
    pub group: GroupParamsRepr,
    pub pks: BTreeMap<String, String>,
}

pub fn public_params_to_json(pp: &PublicParams) -> String {
    let repr = PublicParamsRepr {
        group: group_to_repr(&pp.group),
        pks: pp
            .pks
            .iter()
            .map(|(a, pk)| (a.as_str().to_string(), to_hex(pk.value())))
            .collect(),
    };
    serde_json::to_string(&repr).expect("public-params JSON never fails")
}

pub fn public_params_from_json(text: &str) -> Result<PublicParams, FormatError> {
    let repr: PublicParamsRepr = serde_json::from_str(text)?;
    let group = group_from_repr(&repr.group, "$.group")?;
    let mut pks = BTreeMap::new();
    for (name, hex) in &repr.pks {
        let path = format!("$.pks.{name}");
        let attr = attr_id(&path, name)?;
        let value = from_hex(&path, hex)?;
        let el = group
            .element(value)
            .map_err(|e| FormatError::at(&path, e.to_string()))?;
        pks.insert(attr, el);
    }
    Ok(PublicParams { group, pks })
}

// ---------------------------------------------------------------------------
// Ciphertext
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CiphertextRepr {
    pub v: u32,
    pub group: GroupParamsRepr,
    pub eph: String,
    pub e_prime: String,
    pub policy: NodeRepr,
    pub tag: Option<String>,
    /// Hybrid-mode payload (keystream-encrypted bytes); an extension on top
    /// of the scalar message format, absent in core mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payload: Option<String>,
}

pub fn ciphertext_to_json(
    ct: &Ciphertext,
    group: &GroupParams,
    payload: Option<&[u8]>,
) -> String {
    let repr = CiphertextRepr {
        v: 1,
        group: group_to_repr(group),
        eph: to_hex(ct.eph.value()),
        e_prime: to_dec(&ct.e_prime),
        policy: modified_to_repr(&ct.policy),
        tag: ct.tag.map(hex::encode),
        payload: payload.map(hex::encode),
    };
    serde_json::to_string(&repr).expect("ciphertext JSON never fails")
}

pub struct CiphertextFile {
    pub group: GroupParams,
    pub ciphertext: Ciphertext,
    pub payload: Option<Vec<u8>>,
}

pub fn ciphertext_from_json(text: &str) -> Result<CiphertextFile, FormatError> {
    let repr: CiphertextRepr = serde_json::from_str(text)?;
    if repr.v != 1 {
        return Err(FormatError::at("$.v", format!("unsupported version {}", repr.v)));
    }
    let group = group_from_repr(&repr.group, "$.group")?;
    let eph = group
        .element(from_hex("$.eph", &repr.eph)?)
        .map_err(|e| FormatError::at("$.eph", e.to_string()))?;
    let e_prime = from_dec("$.e_prime", &repr.e_prime)?;
    if &e_prime >= group.q() {
        return Err(FormatError::at("$.e_prime", "scalar out of range"));
    }
    let policy = modified_from_repr(&repr.policy, "$.policy")?;
    let tag = match &repr.tag {
        None => None,
        Some(h) => {
            let bytes = hex::decode(h).map_err(|e| FormatError::at("$.tag", e.to_string()))?;
            let arr: [u8; 32] = bytes
                .try_into()
                .map_err(|_| FormatError::at("$.tag", "expected 32 bytes"))?;
            Some(arr)
        }
    };
    let payload = match &repr.payload {
        None => None,
        Some(h) => Some(hex::decode(h).map_err(|e| FormatError::at("$.payload", e.to_string()))?),
    };
    Ok(CiphertextFile {
        group,
        ciphertext: Ciphertext { e_prime, eph, policy, tag },
        payload,
    })
}

// ---------------------------------------------------------------------------
// Standard-scheme sharings
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ShareRepr {
    pub attr: String,
    pub j: u32,
    pub addr: u32,
    pub value: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SharingRepr {
    pub formula: NodeRepr,
    pub q: String,
    pub shares: Vec<ShareRepr>,
}

pub fn sharing_to_json(sharing: &Sharing) -> String {
    let repr = SharingRepr {
        formula: node_to_repr(sharing.formula.root()),
        q: to_hex(&sharing.q),
        shares: sharing
            .shares
            .iter()
            .map(|sh| ShareRepr {
                attr: sh.attr.as_str().to_string(),
                j: sh.occurrence,
                addr: sh.address,
                value: to_dec(&sh.value),
            })
            .collect(),
    };
    serde_json::to_string(&repr).expect("sharing JSON never fails")
}

pub fn sharing_from_json(text: &str) -> Result<Sharing, FormatError> {
    let repr: SharingRepr = serde_json::from_str(text)?;
    let node = repr_to_node(&repr.formula, "$.formula")?;
    let formula =
        AddressedFormula::from_root(node).map_err(|e| FormatError::formula("$.formula", e))?;
    let q = from_hex("$.q", &repr.q)?;
    let mut shares = Vec::with_capacity(repr.shares.len());
    for (i, sh) in repr.shares.iter().enumerate() {
        let path = format!("$.shares[{i}]");
        let value = from_dec(&format!("{path}.value"), &sh.value)?;
        if value >= q {
            return Err(FormatError::at(&format!("{path}.value"), "share out of range"));
        }
        shares.push(Share {
            attr: attr_id(&format!("{path}.attr"), &sh.attr)?,
            occurrence: sh.j,
            address: sh.addr,
            value,
        });
    }
    if shares.len() != formula.size() {
        return Err(FormatError::at(
            "$.shares",
            format!("expected {} shares, got {}", formula.size(), shares.len()),
        ));
    }
    for (leaf, sh) in formula.var_leaves().iter().zip(&shares) {
        if leaf.attr != sh.attr || leaf.occurrence != sh.occurrence || leaf.address != sh.address
        {
            return Err(FormatError::at(
                &format!("$.shares[{}]", sh.address),
                "share does not match the formula leaf at this position",
            ));
        }
    }
    Ok(Sharing { formula, q, shares })
}

// ---------------------------------------------------------------------------
// Game reports
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct GameReportRepr {
    pub game: String,
    pub trials: u64,
    pub successes: u64,
    pub advantage: f64,
    pub halfwidth: f64,
    pub seed: String,
}

pub fn game_report_to_json(
    game: &str,
    result: &mkabe_core::games::GameResult,
    seed: &[u8],
) -> String {
    let repr = GameReportRepr {
        game: game.to_string(),
        trials: result.trials,
        successes: result.successes,
        advantage: result.advantage_estimate,
        halfwidth: result.confidence_halfwidth,
        seed: hex::encode(seed),
    };
    serde_json::to_string(&repr).expect("report JSON never fails")
}

/// Derives the byte encoding of a scalar with the group's canonical width,
/// used for keystream derivation in hybrid mode.
pub fn scalar_stream_key(m: &BigUint, q: &BigUint) -> PrfKey {
    let width = ((q.bits() + 7) / 8) as usize;
    let raw = m.to_bytes_be();
    let mut out = vec![0u8; width];
    out[width - raw.len()..].copy_from_slice(&raw);
    PrfKey::from_bytes(out)
}
