//! Monotone boolean access formulas.
//!
//! Formulas are built from attribute identifiers with `&` (AND) and `|` (OR);
//! `&` binds tighter, parentheses override, negation is rejected by the
//! grammar. After parsing the tree is normalized (same-operator nesting
//! flattened, unary operators collapsed) and every variable leaf receives a
//! 0-based left-to-right `address` plus a per-attribute occurrence number
//! `j` starting at 1, so `(A & B) | (B & C)` becomes
//! `OR(AND(A₁@0, B₁@1), AND(B₂@2, C₁@3))`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand_core::RngCore;

/// Default cap on the number of variable leaves a formula may contain.
pub const DEFAULT_MAX_LEAVES: usize = 512;

/// Case-sensitive attribute (community/trustee) identifier matching
/// `[A-Za-z_][A-Za-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AttributeId(String);

impl AttributeId {
    pub fn new(name: &str) -> Result<Self, FormulaError> {
        if is_valid_ident(name) {
            Ok(AttributeId(String::from(name)))
        } else {
            Err(FormulaError::InvalidAttribute(String::from(name)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A variable leaf `X_{p,j}` together with its position in the formula.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarLeaf {
    pub attr: AttributeId,
    /// 1-based occurrence number of `attr` in left-to-right order.
    pub occurrence: u32,
    /// 0-based left-to-right position among all variable leaves.
    pub address: u32,
}

/// A fictitious-trustee leaf `Y_α` carrying its public share value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct YLeaf {
    /// 1-based creation index (the global counter α).
    pub index: u32,
    pub value: BigUint,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FormulaNode {
    And(Vec<FormulaNode>),
    Or(Vec<FormulaNode>),
    Var(VarLeaf),
    Y(YLeaf),
}

impl FormulaNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self, FormulaNode::Var(_) | FormulaNode::Y(_))
    }

    fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a VarLeaf)) {
        match self {
            FormulaNode::Var(v) => f(v),
            FormulaNode::Y(_) => {}
            FormulaNode::And(cs) | FormulaNode::Or(cs) => {
                for c in cs {
                    c.for_each_var(f);
                }
            }
        }
    }

    fn for_each_y<'a>(&'a self, f: &mut impl FnMut(&'a YLeaf)) {
        match self {
            FormulaNode::Var(_) => {}
            FormulaNode::Y(y) => f(y),
            FormulaNode::And(cs) | FormulaNode::Or(cs) => {
                for c in cs {
                    c.for_each_y(f);
                }
            }
        }
    }
}

/// A normalized, addressed monotone formula with no Y-leaves.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AddressedFormula {
    root: FormulaNode,
    size: usize,
}

impl AddressedFormula {
    /// Validates a node tree as an addressed formula: normalized shape, no
    /// Y-leaves, addresses exactly `0..L-1` left-to-right, occurrences dense
    /// per attribute.
    pub fn from_root(root: FormulaNode) -> Result<Self, FormulaError> {
        check_normalized(&root)?;
        let mut size = 0usize;
        let mut err = None;
        let mut occ: BTreeMap<&AttributeId, u32> = BTreeMap::new();
        root.for_each_var(&mut |v| {
            if err.is_some() {
                return;
            }
            if v.address as usize != size {
                err = Some(FormulaError::BadAddressing);
            }
            let o = occ.entry(&v.attr).or_insert(0);
            *o += 1;
            if v.occurrence != *o {
                err = Some(FormulaError::BadAddressing);
            }
            size += 1;
        });
        if let Some(e) = err {
            return Err(e);
        }
        let mut has_y = false;
        root.for_each_y(&mut |_| has_y = true);
        if has_y {
            return Err(FormulaError::UnexpectedYLeaf);
        }
        Ok(AddressedFormula { root, size })
    }

    pub fn root(&self) -> &FormulaNode {
        &self.root
    }

    /// Number of variable leaves (the formula's size).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn attributes(&self) -> BTreeSet<AttributeId> {
        let mut set = BTreeSet::new();
        self.root.for_each_var(&mut |v| {
            set.insert(v.attr.clone());
        });
        set
    }

    pub fn var_leaves(&self) -> Vec<&VarLeaf> {
        let mut out = Vec::with_capacity(self.size);
        self.root.for_each_var(&mut |v| out.push(v));
        out
    }

    /// True iff granting exactly the attributes in `attrs` satisfies the
    /// formula. Monotone: supersets can only flip false to true.
    pub fn evaluate(&self, attrs: &BTreeSet<AttributeId>) -> bool {
        eval_node(&self.root, attrs)
    }

    /// Renders back to the surface grammar (`&`, `|`, parentheses).
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_node(&self.root, false, &mut out);
        out
    }
}

/// Output of the `g_s` transform: the original formula with Y-leaves
/// (carrying their public values) spliced in.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModifiedFormula {
    root: FormulaNode,
}

impl ModifiedFormula {
    /// Validates Y indices (dense `1..=t` in left-to-right order) and the
    /// addressing of the underlying variable leaves.
    pub fn from_root(root: FormulaNode) -> Result<Self, FormulaError> {
        let mut next = 1u32;
        let mut ok = true;
        root.for_each_y(&mut |y| {
            if y.index != next {
                ok = false;
            }
            next += 1;
        });
        if !ok {
            return Err(FormulaError::BadAddressing);
        }
        let mf = ModifiedFormula { root };
        mf.erase_y()?;
        Ok(mf)
    }

    pub(crate) fn from_root_unchecked(root: FormulaNode) -> Self {
        ModifiedFormula { root }
    }

    pub fn root(&self) -> &FormulaNode {
        &self.root
    }

    /// Total leaf count, variable and Y-leaves together.
    pub fn leaf_count(&self) -> usize {
        let mut n = 0usize;
        self.root.for_each_var(&mut |_| n += 1);
        self.root.for_each_y(&mut |_| n += 1);
        n
    }

    pub fn y_count(&self) -> usize {
        let mut n = 0usize;
        self.root.for_each_y(&mut |_| n += 1);
        n
    }

    /// Public y-values in index order.
    pub fn y_values(&self) -> Vec<BigUint> {
        let mut out = Vec::new();
        self.root.for_each_y(&mut |y| out.push(y.value.clone()));
        out
    }

    /// True iff `attrs` satisfies the underlying access structure
    /// (Y-leaves are always considered satisfied).
    pub fn evaluate(&self, attrs: &BTreeSet<AttributeId>) -> bool {
        eval_node(&self.root, attrs)
    }

    /// Strips all Y-leaves and collapses, recovering the original
    /// addressed formula (addresses are untouched by the transform).
    pub fn erase_y(&self) -> Result<AddressedFormula, FormulaError> {
        let stripped = strip_y(&self.root).ok_or(FormulaError::BadAddressing)?;
        AddressedFormula::from_root(normalize(stripped))
    }
}

fn strip_y(node: &FormulaNode) -> Option<FormulaNode> {
    match node {
        FormulaNode::Var(v) => Some(FormulaNode::Var(v.clone())),
        FormulaNode::Y(_) => None,
        FormulaNode::And(cs) => {
            let kept: Vec<_> = cs.iter().filter_map(strip_y).collect();
            if kept.is_empty() {
                None
            } else {
                Some(FormulaNode::And(kept))
            }
        }
        FormulaNode::Or(cs) => {
            let kept: Vec<_> = cs.iter().filter_map(strip_y).collect();
            if kept.is_empty() {
                None
            } else {
                Some(FormulaNode::Or(kept))
            }
        }
    }
}

pub(crate) fn eval_node(node: &FormulaNode, attrs: &BTreeSet<AttributeId>) -> bool {
    match node {
        FormulaNode::Var(v) => attrs.contains(&v.attr),
        FormulaNode::Y(_) => true,
        FormulaNode::And(cs) => cs.iter().all(|c| eval_node(c, attrs)),
        FormulaNode::Or(cs) => cs.iter().any(|c| eval_node(c, attrs)),
    }
}

fn render_node(node: &FormulaNode, parent_is_and: bool, out: &mut String) {
    match node {
        FormulaNode::Var(v) => out.push_str(v.attr.as_str()),
        FormulaNode::Y(y) => {
            // Y-leaves have no surface syntax; rendered for diagnostics only.
            out.push('Y');
            out.push_str(&itoa(y.index));
        }
        FormulaNode::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                render_node(c, true, out);
            }
        }
        FormulaNode::Or(cs) => {
            if parent_is_and {
                out.push('(');
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                render_node(c, false, out);
            }
            if parent_is_and {
                out.push(')');
            }
        }
    }
}

fn itoa(mut n: u32) -> String {
    let mut s = String::new();
    if n == 0 {
        s.push('0');
        return s;
    }
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(b'0' + (n % 10) as u8);
        n /= 10;
    }
    for d in digits.iter().rev() {
        s.push(*d as char);
    }
    s
}

/// Errors from parsing, validation, or attribute construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FormulaError {
    /// Syntax error at byte `position`; `expected` names what was missing.
    Syntax {
        position: usize,
        expected: &'static str,
    },
    /// Leaf count exceeds the configured bound.
    SizeExceeded { leaves: usize, limit: usize },
    InvalidAttribute(String),
    /// Addresses, occurrences or Y-indices are not dense/left-to-right.
    BadAddressing,
    /// A Y-leaf appeared where only plain variables are allowed.
    UnexpectedYLeaf,
    /// Operator nesting violates the normalized shape.
    NotNormalized,
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::Syntax { position, expected } => {
                write!(f, "syntax error at position {position}: expected {expected}")
            }
            FormulaError::SizeExceeded { leaves, limit } => {
                write!(f, "formula has {leaves} leaves, limit is {limit}")
            }
            FormulaError::InvalidAttribute(s) => write!(f, "invalid attribute name: {s:?}"),
            FormulaError::BadAddressing => write!(f, "addresses or occurrence numbers are not dense"),
            FormulaError::UnexpectedYLeaf => write!(f, "unexpected Y-leaf in plain formula"),
            FormulaError::NotNormalized => write!(f, "formula tree is not normalized"),
        }
    }
}

impl core::error::Error for FormulaError {}

/// Parses `text` with the default leaf bound ([`DEFAULT_MAX_LEAVES`]).
pub fn parse(text: &str) -> Result<AddressedFormula, FormulaError> {
    parse_with_limit(text, DEFAULT_MAX_LEAVES)
}

/// Grammar: `or := and ("|" and)* ; and := atom ("&" atom)* ;
/// atom := IDENT | "(" or ")"`. The result is normalized and addressed.
pub fn parse_with_limit(text: &str, max_leaves: usize) -> Result<AddressedFormula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let node = p.parse_or()?;
    match p.peek() {
        None => {}
        Some(t) => {
            return Err(FormulaError::Syntax {
                position: t.position,
                expected: "end of input",
            })
        }
    }
    finish(node, max_leaves)
}

/// Normalizes, addresses and size-checks a raw tree (occurrence/address
/// fields of incoming `Var` leaves are ignored and reassigned).
pub fn finish(node: FormulaNode, max_leaves: usize) -> Result<AddressedFormula, FormulaError> {
    let node = normalize(node);
    let addressed = assign_addresses(node);
    let f = AddressedFormula::from_root(addressed)?;
    if f.size > max_leaves {
        return Err(FormulaError::SizeExceeded {
            leaves: f.size,
            limit: max_leaves,
        });
    }
    Ok(f)
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokKind,
    position: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Ident(String),
    Amp,
    Pipe,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>, FormulaError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'&' => {
                tokens.push(Token { kind: TokKind::Amp, position: i });
                i += 1;
            }
            b'|' => {
                tokens.push(Token { kind: TokKind::Pipe, position: i });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokKind::LParen, position: i });
                i += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokKind::RParen, position: i });
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Ident(String::from(&text[start..i])),
                    position: start,
                });
            }
            _ => {
                return Err(FormulaError::Syntax {
                    position: i,
                    expected: "identifier, '&', '|', '(' or ')'",
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Byte length of the input; reported position for errors at end of input.
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn parse_or(&mut self) -> Result<FormulaNode, FormulaError> {
        let mut children = Vec::new();
        children.push(self.parse_and()?);
        while matches!(self.peek().map(|t| &t.kind), Some(TokKind::Pipe)) {
            self.pos += 1;
            children.push(self.parse_and()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FormulaNode::Or(children)
        })
    }

    fn parse_and(&mut self) -> Result<FormulaNode, FormulaError> {
        let mut children = Vec::new();
        children.push(self.parse_atom()?);
        while matches!(self.peek().map(|t| &t.kind), Some(TokKind::Amp)) {
            self.pos += 1;
            children.push(self.parse_atom()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FormulaNode::And(children)
        })
    }

    fn parse_atom(&mut self) -> Result<FormulaNode, FormulaError> {
        let end = self.end;
        match self.peek().cloned() {
            Some(Token { kind: TokKind::Ident(name), .. }) => {
                self.pos += 1;
                Ok(FormulaNode::Var(VarLeaf {
                    attr: AttributeId(name),
                    occurrence: 0,
                    address: 0,
                }))
            }
            Some(Token { kind: TokKind::LParen, .. }) => {
                self.pos += 1;
                let inner = self.parse_or()?;
                match self.peek() {
                    Some(t) if t.kind == TokKind::RParen => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some(t) => Err(FormulaError::Syntax {
                        position: t.position,
                        expected: "')'",
                    }),
                    None => Err(FormulaError::Syntax {
                        position: end,
                        expected: "')'",
                    }),
                }
            }
            Some(t) => Err(FormulaError::Syntax {
                position: t.position,
                expected: "identifier or '('",
            }),
            None => Err(FormulaError::Syntax {
                position: end,
                expected: "identifier or '('",
            }),
        }
    }
}

/// Flattens same-operator nesting and collapses single-child operator
/// nodes; leaf order is preserved. Idempotent.
pub fn normalize(node: FormulaNode) -> FormulaNode {
    match node {
        leaf @ (FormulaNode::Var(_) | FormulaNode::Y(_)) => leaf,
        FormulaNode::And(cs) => rebuild(cs, true),
        FormulaNode::Or(cs) => rebuild(cs, false),
    }
}

fn rebuild(children: Vec<FormulaNode>, is_and: bool) -> FormulaNode {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        let c = normalize(c);
        match (is_and, c) {
            (true, FormulaNode::And(grand)) => flat.extend(grand),
            (false, FormulaNode::Or(grand)) => flat.extend(grand),
            (_, other) => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else if is_and {
        FormulaNode::And(flat)
    } else {
        FormulaNode::Or(flat)
    }
}

fn check_normalized(node: &FormulaNode) -> Result<(), FormulaError> {
    match node {
        FormulaNode::Var(_) | FormulaNode::Y(_) => Ok(()),
        FormulaNode::And(cs) => {
            if cs.len() < 2 || cs.iter().any(|c| matches!(c, FormulaNode::And(_))) {
                return Err(FormulaError::NotNormalized);
            }
            cs.iter().try_for_each(check_normalized)
        }
        FormulaNode::Or(cs) => {
            if cs.len() < 2 || cs.iter().any(|c| matches!(c, FormulaNode::Or(_))) {
                return Err(FormulaError::NotNormalized);
            }
            cs.iter().try_for_each(check_normalized)
        }
    }
}

fn assign_addresses(node: FormulaNode) -> FormulaNode {
    let mut next_addr = 0u32;
    let mut occ: BTreeMap<AttributeId, u32> = BTreeMap::new();
    assign_rec(node, &mut next_addr, &mut occ)
}

fn assign_rec(
    node: FormulaNode,
    next_addr: &mut u32,
    occ: &mut BTreeMap<AttributeId, u32>,
) -> FormulaNode {
    match node {
        FormulaNode::Var(v) => {
            let o = occ.entry(v.attr.clone()).or_insert(0);
            *o += 1;
            let leaf = VarLeaf {
                attr: v.attr,
                occurrence: *o,
                address: *next_addr,
            };
            *next_addr += 1;
            FormulaNode::Var(leaf)
        }
        FormulaNode::Y(y) => FormulaNode::Y(y),
        FormulaNode::And(cs) => FormulaNode::And(
            cs.into_iter().map(|c| assign_rec(c, next_addr, occ)).collect(),
        ),
        FormulaNode::Or(cs) => FormulaNode::Or(
            cs.into_iter().map(|c| assign_rec(c, next_addr, occ)).collect(),
        ),
    }
}

/// Generates a random normalized formula with at most `max_leaves` leaves
/// over a pool of `num_attrs` attributes named `A`, `B`, ... Used by the
/// game harness and property tests.
pub fn random_formula(
    rng: &mut dyn RngCore,
    max_leaves: usize,
    num_attrs: usize,
) -> AddressedFormula {
    assert!(max_leaves >= 1 && num_attrs >= 1 && num_attrs <= 26);
    let leaves = 1 + (rng.next_u32() as usize) % max_leaves;
    let node = random_node(rng, leaves, num_attrs, false);
    finish(node, max_leaves).expect("generated formula within bounds")
}

fn random_node(
    rng: &mut dyn RngCore,
    leaves: usize,
    num_attrs: usize,
    parent_and: bool,
) -> FormulaNode {
    if leaves == 1 {
        let idx = (rng.next_u32() as usize) % num_attrs;
        let name = [b'A' + idx as u8];
        let attr = AttributeId(String::from(core::str::from_utf8(&name).unwrap()));
        return FormulaNode::Var(VarLeaf {
            attr,
            occurrence: 0,
            address: 0,
        });
    }
    // Split the leaf budget across 2..=min(4, leaves) children.
    let max_children = core::cmp::min(4, leaves);
    let n_children = 2 + (rng.next_u32() as usize) % (max_children - 1);
    let mut budgets = alloc::vec![1usize; n_children];
    for _ in 0..(leaves - n_children) {
        let i = (rng.next_u32() as usize) % n_children;
        budgets[i] += 1;
    }
    let is_and = if parent_and { false } else { rng.next_u32() & 1 == 0 };
    let children = budgets
        .into_iter()
        .map(|b| random_node(rng, b, num_attrs, is_and))
        .collect();
    if is_and {
        FormulaNode::And(children)
    } else {
        FormulaNode::Or(children)
    }
}
