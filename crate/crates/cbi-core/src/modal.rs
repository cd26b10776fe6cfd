//! The modal-logic presentation of CBI: ML_CBI frames with diamond
//! modalities, the satisfaction relation, the eleven AX_CBI axiom schemata,
//! very-simple-Sahlqvist shape recognition, and the translations between
//! CBI-formulas and modal formulas (and between CBI-models and frames).
//!
//! A frame interprets five modalities: the nullary `e` and `∞` (membership
//! in distinguished subsets), the unary `−` (a map from elements to subsets),
//! and the binary `∘` and `⊸` (maps from pairs of elements to subsets, with
//! `⊸` read informally as ¬(· —∗ ¬·)). All five are "diamond" possibility
//! modalities: in particular `−` is monotone, not a negation. Frames carry
//! no axioms a priori; [`check_axioms`] tests the AX_CBI schemata, and
//! unitary frames passing all of them are exactly the images of CBI-models
//! under [`embed_model`].
//!
//! Concrete tokens extend the formula grammar: `E` for e, `INF` for ∞,
//! prefix `-.` for −, infix `o` for ∘ and `o-` for ⊸. Precedence, tightest
//! first: `{!, -.} > {o, o-} > & > | > ->`, with `o` and `o-` sharing a
//! left-associative level and `->` right-associative; `<->` is sugar as for
//! CBI-formulas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::formula::{Formula, ParseError, PropVar, RenderStyle};
use crate::semantics::{
    Environment, ModelError, ResourceModel, TruthOutcome, MAX_CARRIER,
};

// ---------------------------------------------------------------------------
// Modal formulas
// ---------------------------------------------------------------------------

/// A modal logic formula.
///
/// The additive part (`Var` … `Imp`) is shared with CBI-formulas; the five
/// modalities are `UnitMod` (e), `InftyMod` (∞), `InvMod` (−), `CompMod`
/// (∘), and `CoWandMod` (⊸). Equality is syntactic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModalFormula {
    Var(PropVar),
    Top,
    Bot,
    Not(Box<ModalFormula>),
    And(Box<ModalFormula>, Box<ModalFormula>),
    Or(Box<ModalFormula>, Box<ModalFormula>),
    Imp(Box<ModalFormula>, Box<ModalFormula>),
    UnitMod,
    InftyMod,
    InvMod(Box<ModalFormula>),
    CompMod(Box<ModalFormula>, Box<ModalFormula>),
    CoWandMod(Box<ModalFormula>, Box<ModalFormula>),
}

impl ModalFormula {
    /// Shorthand for a variable formula.
    pub fn var(name: &str) -> ModalFormula {
        ModalFormula::Var(PropVar::new(name))
    }

    /// Node count of the syntax tree.
    pub fn size(&self) -> usize {
        use ModalFormula::*;
        match self {
            Var(_) | Top | Bot | UnitMod | InftyMod => 1,
            Not(a) | InvMod(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Imp(a, b) | CompMod(a, b) | CoWandMod(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// The set of propositional variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<PropVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<PropVar>) {
        use ModalFormula::*;
        match self {
            Var(p) => {
                out.insert(p.clone());
            }
            Top | Bot | UnitMod | InftyMod => {}
            Not(a) | InvMod(a) => a.collect_vars(out),
            And(a, b) | Or(a, b) | Imp(a, b) | CompMod(a, b) | CoWandMod(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

// -- parsing ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum MTok {
    Ident(String),
    Top,
    Bot,
    Unit,
    Inf,
    Bang,
    InvOp,
    Amp,
    Pipe,
    CompOp,
    CoWandOp,
    Arrow,
    IffOp,
    LParen,
    RParen,
}

impl MTok {
    fn describe(&self) -> String {
        match self {
            MTok::Ident(s) => format!("identifier `{s}`"),
            MTok::Top => "`top`".into(),
            MTok::Bot => "`bot`".into(),
            MTok::Unit => "`E`".into(),
            MTok::Inf => "`INF`".into(),
            MTok::Bang => "`!`".into(),
            MTok::InvOp => "`-.`".into(),
            MTok::Amp => "`&`".into(),
            MTok::Pipe => "`|`".into(),
            MTok::CompOp => "`o`".into(),
            MTok::CoWandOp => "`o-`".into(),
            MTok::Arrow => "`->`".into(),
            MTok::IffOp => "`<->`".into(),
            MTok::LParen => "`(`".into(),
            MTok::RParen => "`)`".into(),
        }
    }
}

struct MLexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> MLexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, pat: &str) -> bool {
        if self.rest().starts_with(pat) {
            self.pos += pat.len();
            true
        } else {
            false
        }
    }

    fn tokenize(mut self) -> Result<Vec<(usize, MTok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.rest().chars().next() {
                if c.is_whitespace() {
                    self.pos += c.len_utf8();
                } else {
                    break;
                }
            }
            let start = self.pos;
            let Some(c) = self.rest().chars().next() else {
                return Ok(out);
            };
            // Multi-character operators first (longest match). `o-` must be
            // tried before identifiers so `P o- Q` does not lex as `o`, `-`.
            let tok = if self.eat("<->") || self.eat("↔") {
                MTok::IffOp
            } else if self.eat("->") || self.eat("→") {
                MTok::Arrow
            } else if self.eat("-.") || self.eat("−") {
                MTok::InvOp
            } else if self.eat("o-") || self.eat("⊸") {
                MTok::CoWandOp
            } else if self.eat("∘") {
                MTok::CompOp
            } else if self.eat("∞") {
                MTok::Inf
            } else if self.eat("⊤") {
                MTok::Top
            } else if self.eat("⊥") {
                MTok::Bot
            } else if self.eat("!") || self.eat("¬") {
                MTok::Bang
            } else if self.eat("&") || self.eat("∧") {
                MTok::Amp
            } else if self.eat("|") || self.eat("∨") {
                MTok::Pipe
            } else if self.eat("(") {
                MTok::LParen
            } else if self.eat(")") {
                MTok::RParen
            } else if c.is_ascii_alphabetic() {
                let word: String = self
                    .rest()
                    .chars()
                    .take_while(|ch| ch.is_ascii_alphanumeric() || *ch == '_')
                    .collect();
                self.pos += word.len();
                match word.as_str() {
                    "top" => MTok::Top,
                    "bot" => MTok::Bot,
                    "E" => MTok::Unit,
                    "INF" => MTok::Inf,
                    "o" => MTok::CompOp,
                    _ => MTok::Ident(word),
                }
            } else {
                return Err(ParseError {
                    offset: start,
                    found: format!("`{c}`"),
                    expected: vec!["a modal formula token".into()],
                });
            };
            out.push((start, tok));
        }
    }
}

struct MParser {
    toks: Vec<(usize, MTok)>,
    idx: usize,
    end: usize,
}

impl MParser {
    fn peek(&self) -> Option<&MTok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn found(&self) -> String {
        self.peek()
            .map(|t| t.describe())
            .unwrap_or_else(|| "end of input".into())
    }

    fn bump(&mut self) -> MTok {
        let t = self.toks[self.idx].1.clone();
        self.idx += 1;
        t
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            found: self.found(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Lowest level: `->` (right-associative) and the `<->` sugar.
    fn parse_imp(&mut self) -> Result<ModalFormula, ParseError> {
        let lhs = self.parse_or()?;
        match self.peek() {
            Some(MTok::Arrow) => {
                self.bump();
                let rhs = self.parse_imp()?;
                Ok(ModalFormula::Imp(Box::new(lhs), Box::new(rhs)))
            }
            Some(MTok::IffOp) => {
                self.bump();
                let rhs = self.parse_or()?;
                if matches!(self.peek(), Some(MTok::Arrow | MTok::IffOp)) {
                    return Err(self.err(&["`)`", "end of input"]));
                }
                Ok(ModalFormula::And(
                    Box::new(ModalFormula::Imp(
                        Box::new(lhs.clone()),
                        Box::new(rhs.clone()),
                    )),
                    Box::new(ModalFormula::Imp(Box::new(rhs), Box::new(lhs))),
                ))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_or(&mut self) -> Result<ModalFormula, ParseError> {
        let mut lhs = self.parse_and()?;
        while matches!(self.peek(), Some(MTok::Pipe)) {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = ModalFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<ModalFormula, ParseError> {
        let mut lhs = self.parse_mult()?;
        while matches!(self.peek(), Some(MTok::Amp)) {
            self.bump();
            let rhs = self.parse_mult()?;
            lhs = ModalFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// `o` and `o-` share one left-associative level.
    fn parse_mult(&mut self) -> Result<ModalFormula, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let cowand = match self.peek() {
                Some(MTok::CompOp) => false,
                Some(MTok::CoWandOp) => true,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = if cowand {
                ModalFormula::CoWandMod(Box::new(lhs), Box::new(rhs))
            } else {
                ModalFormula::CompMod(Box::new(lhs), Box::new(rhs))
            };
        }
    }

    fn parse_unary(&mut self) -> Result<ModalFormula, ParseError> {
        match self.peek() {
            Some(MTok::Bang) => {
                self.bump();
                Ok(ModalFormula::Not(Box::new(self.parse_unary()?)))
            }
            Some(MTok::InvOp) => {
                self.bump();
                Ok(ModalFormula::InvMod(Box::new(self.parse_unary()?)))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<ModalFormula, ParseError> {
        match self.peek() {
            Some(MTok::Top) => {
                self.bump();
                Ok(ModalFormula::Top)
            }
            Some(MTok::Bot) => {
                self.bump();
                Ok(ModalFormula::Bot)
            }
            Some(MTok::Unit) => {
                self.bump();
                Ok(ModalFormula::UnitMod)
            }
            Some(MTok::Inf) => {
                self.bump();
                Ok(ModalFormula::InftyMod)
            }
            Some(MTok::Ident(_)) => {
                let MTok::Ident(name) = self.bump() else {
                    unreachable!()
                };
                Ok(ModalFormula::Var(PropVar::new(name)))
            }
            Some(MTok::LParen) => {
                self.bump();
                let inner = self.parse_imp()?;
                if matches!(self.peek(), Some(MTok::RParen)) {
                    self.bump();
                    Ok(inner)
                } else {
                    Err(self.err(&["`)`"]))
                }
            }
            _ => Err(self.err(&[
                "identifier", "`top`", "`bot`", "`E`", "`INF`", "`!`", "`-.`", "`(`",
            ])),
        }
    }
}

/// Parses a modal formula from its ASCII (or unicode-alias) rendering.
pub fn parse_modal_formula(text: &str) -> Result<ModalFormula, ParseError> {
    let toks = MLexer { src: text, pos: 0 }.tokenize()?;
    let mut p = MParser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let a = p.parse_imp()?;
    if p.peek().is_some() {
        return Err(p.err(&["end of input", "a binary connective"]));
    }
    Ok(a)
}

// -- rendering --------------------------------------------------------------

/// Precedence level of a formula's top connective (higher binds tighter).
fn mlevel(a: &ModalFormula) -> u8 {
    use ModalFormula::*;
    match a {
        Var(_) | Top | Bot | UnitMod | InftyMod => 5,
        Not(_) | InvMod(_) => 4,
        CompMod(_, _) | CoWandMod(_, _) => 3,
        And(_, _) => 2,
        Or(_, _) => 1,
        Imp(_, _) => 0,
    }
}

fn mstyle_tokens(style: RenderStyle) -> [&'static str; 11] {
    // Order: top, bot, unit, inf, not, inv, and, or, imp, comp, cowand.
    match style {
        RenderStyle::Ascii => [
            "top", "bot", "E", "INF", "!", "-.", "&", "|", "->", "o", "o-",
        ],
        RenderStyle::Unicode => [
            "⊤", "⊥", "e", "∞", "¬", "−", "∧", "∨", "→", "∘", "⊸",
        ],
        RenderStyle::Latex => [
            "\\top",
            "\\bot",
            "e",
            "\\infty",
            "\\neg",
            "\\mathord{-}",
            "\\wedge",
            "\\vee",
            "\\rightarrow",
            "\\circ",
            "\\multimap",
        ],
    }
}

/// Renders a modal formula with minimal parentheses. The ASCII style
/// round-trips: `parse_modal_formula(render_modal(a, Ascii)) = a`.
pub fn render_modal(a: &ModalFormula, style: RenderStyle) -> String {
    let mut out = String::new();
    render_modal_into(a, style, &mut out);
    out
}

fn render_modal_into(a: &ModalFormula, style: RenderStyle, out: &mut String) {
    use ModalFormula::*;
    let t = mstyle_tokens(style);
    let spaced_unary = matches!(style, RenderStyle::Latex);
    match a {
        Var(p) => out.push_str(p.name()),
        Top => out.push_str(t[0]),
        Bot => out.push_str(t[1]),
        UnitMod => out.push_str(t[2]),
        InftyMod => out.push_str(t[3]),
        Not(b) | InvMod(b) => {
            out.push_str(if matches!(a, Not(_)) { t[4] } else { t[5] });
            if spaced_unary {
                out.push(' ');
            }
            render_modal_child(b, style, mlevel(a) > mlevel(b), out);
        }
        And(x, y) | Or(x, y) | Imp(x, y) | CompMod(x, y) | CoWandMod(x, y) => {
            let op = match a {
                And(_, _) => t[6],
                Or(_, _) => t[7],
                Imp(_, _) => t[8],
                CompMod(_, _) => t[9],
                CoWandMod(_, _) => t[10],
                _ => unreachable!(),
            };
            let lv = mlevel(a);
            let right_assoc = matches!(a, Imp(_, _));
            let lparen = mlevel(x) < lv || (mlevel(x) == lv && right_assoc);
            let rparen = mlevel(y) < lv || (mlevel(y) == lv && !right_assoc);
            render_modal_child(x, style, lparen, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            render_modal_child(y, style, rparen, out);
        }
    }
}

fn render_modal_child(a: &ModalFormula, style: RenderStyle, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        render_modal_into(a, style, out);
        out.push(')');
    } else {
        render_modal_into(a, style, out);
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_modal(self, RenderStyle::Ascii))
    }
}

// ---------------------------------------------------------------------------
// ML_CBI frames
// ---------------------------------------------------------------------------

/// A finite ML_CBI frame ⟨R, ∘, ⊸, e, −, ∞⟩.
///
/// Unlike CBI-models, frames are unconstrained: `e` and `∞` are arbitrary
/// subsets, `−` maps each element to an arbitrary subset, and `∘`, `⊸` are
/// arbitrary ternary relations. [`check_axioms`] tests the AX_CBI schemata;
/// a frame is *unitary* when `e` is a singleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MLFrame {
    names: Vec<String>,
    /// `comp[x * n + y]` is the bitmask of x∘y.
    comp: Vec<u64>,
    /// `cowand[x * n + y]` is the bitmask of {x}⊸{y}; the pointwise
    /// extension to sets is the union over member pairs.
    cowand: Vec<u64>,
    unit_set: u64,
    infinity_set: u64,
    /// `inv[x]` is the bitmask of −x.
    inv: Vec<u64>,
    label: Option<String>,
}

fn check_frame_carrier(names: &[String]) -> Result<(), ModelError> {
    if names.is_empty() {
        return Err(ModelError::Malformed("empty carrier".into()));
    }
    if names.len() > MAX_CARRIER {
        return Err(ModelError::SizeGuard {
            size: names.len(),
            cap: MAX_CARRIER,
        });
    }
    let distinct: BTreeSet<&String> = names.iter().collect();
    if distinct.len() != names.len() {
        return Err(ModelError::Malformed("duplicate carrier ids".into()));
    }
    Ok(())
}

impl MLFrame {
    /// Builds a frame from raw parts (element indices). Checks
    /// well-formedness (index ranges, carrier size) only; frames carry no
    /// axioms.
    pub fn from_parts(
        names: Vec<String>,
        unit_set: &[usize],
        infinity_set: &[usize],
        inv: &[Vec<usize>],
        comp: &[(usize, usize, usize)],
        cowand: &[(usize, usize, usize)],
        label: Option<String>,
    ) -> Result<MLFrame, ModelError> {
        check_frame_carrier(&names)?;
        let n = names.len();
        let in_range = |i: usize, what: &str| -> Result<(), ModelError> {
            if i >= n {
                Err(ModelError::Malformed(format!(
                    "{what} index {i} outside carrier"
                )))
            } else {
                Ok(())
            }
        };
        let mut unit = 0u64;
        for &x in unit_set {
            in_range(x, "unit_set")?;
            unit |= 1 << x;
        }
        let mut infinity = 0u64;
        for &x in infinity_set {
            in_range(x, "infinity_set")?;
            infinity |= 1 << x;
        }
        if inv.len() != n {
            return Err(ModelError::Malformed(
                "inv must list one image set per carrier element".into(),
            ));
        }
        let mut inv_masks = vec![0u64; n];
        for (x, img) in inv.iter().enumerate() {
            for &y in img {
                in_range(y, "inv")?;
                inv_masks[x] |= 1 << y;
            }
        }
        let mut comp_masks = vec![0u64; n * n];
        for &(x, y, z) in comp {
            in_range(x, "comp")?;
            in_range(y, "comp")?;
            in_range(z, "comp")?;
            comp_masks[x * n + y] |= 1 << z;
        }
        let mut cowand_masks = vec![0u64; n * n];
        for &(x, y, z) in cowand {
            in_range(x, "cowand")?;
            in_range(y, "cowand")?;
            in_range(z, "cowand")?;
            cowand_masks[x * n + y] |= 1 << z;
        }
        Ok(MLFrame {
            names,
            comp: comp_masks,
            cowand: cowand_masks,
            unit_set: unit,
            infinity_set: infinity,
            inv: inv_masks,
            label,
        })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.into());
        self
    }
    pub fn full_mask(&self) -> u64 {
        if self.n() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        }
    }
    /// The bitmask of e.
    pub fn unit_mask(&self) -> u64 {
        self.unit_set
    }
    /// The bitmask of ∞.
    pub fn infinity_mask(&self) -> u64 {
        self.infinity_set
    }
    /// The bitmask of −x.
    pub fn inv_mask(&self, x: usize) -> u64 {
        self.inv[x]
    }
    /// The bitmask of x∘y.
    pub fn comp_mask(&self, x: usize, y: usize) -> u64 {
        self.comp[x * self.n() + y]
    }
    /// The bitmask of {x}⊸{y}.
    pub fn cowand_mask(&self, x: usize, y: usize) -> u64 {
        self.cowand[x * self.n() + y]
    }
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.names.iter().position(|s| s == id)
    }
    /// Whether e is a singleton.
    pub fn is_unitary(&self) -> bool {
        self.unit_set.count_ones() == 1
    }

    fn mask_to_names(&self, mask: u64) -> BTreeSet<String> {
        (0..self.n())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// Denotation bitmask of a modal formula under per-variable masks. All
    /// five modalities are diamonds: the denotation is a union over the
    /// relevant relation images, so every modality is monotone in each
    /// argument.
    pub fn mdenotation(&self, env: &BTreeMap<PropVar, u64>, a: &ModalFormula) -> u64 {
        use ModalFormula::*;
        let n = self.n();
        let full = self.full_mask();
        match a {
            Var(p) => env.get(p).copied().unwrap_or(0),
            Top => full,
            Bot => 0,
            Not(b) => full & !self.mdenotation(env, b),
            And(x, y) => self.mdenotation(env, x) & self.mdenotation(env, y),
            Or(x, y) => self.mdenotation(env, x) | self.mdenotation(env, y),
            Imp(x, y) => full & (!self.mdenotation(env, x) | self.mdenotation(env, y)),
            UnitMod => self.unit_set,
            InftyMod => self.infinity_set,
            InvMod(b) => {
                let d = self.mdenotation(env, b);
                let mut out = 0;
                for r in 0..n {
                    if d >> r & 1 == 1 {
                        out |= self.inv[r];
                    }
                }
                out
            }
            CompMod(x, y) => self.image(&self.comp, self.mdenotation(env, x), self.mdenotation(env, y)),
            CoWandMod(x, y) => {
                self.image(&self.cowand, self.mdenotation(env, x), self.mdenotation(env, y))
            }
        }
    }

    /// Union of `rel[x∘y]` over x ∈ d1, y ∈ d2.
    fn image(&self, rel: &[u64], d1: u64, d2: u64) -> u64 {
        let n = self.n();
        let mut out = 0;
        for x in 0..n {
            if d1 >> x & 1 == 0 {
                continue;
            }
            for y in 0..n {
                if d2 >> y & 1 == 1 {
                    out |= rel[x * n + y];
                }
            }
        }
        out
    }

    /// Converts a public environment to per-variable masks, rejecting ids
    /// outside the carrier.
    pub fn env_masks(&self, env: &Environment) -> Result<BTreeMap<PropVar, u64>, ModelError> {
        let mut out = BTreeMap::new();
        for (p, els) in &env.0 {
            let mut mask = 0u64;
            for id in els {
                let idx = self
                    .index_of(id)
                    .ok_or_else(|| ModelError::UnknownElement(id.clone()))?;
                mask |= 1 << idx;
            }
            out.insert(p.clone(), mask);
        }
        Ok(out)
    }

    /// The modal satisfaction relation r ⊨ρ A.
    pub fn msat(&self, env: &Environment, r: &str, a: &ModalFormula) -> Result<bool, ModelError> {
        let idx = self
            .index_of(r)
            .ok_or_else(|| ModelError::UnknownElement(r.into()))?;
        let masks = self.env_masks(env)?;
        Ok(self.mdenotation(&masks, a) >> idx & 1 == 1)
    }

    /// Truth on the frame: satisfaction at every point under every
    /// environment over `vars(a)`, with a budget on the number of
    /// environments enumerated.
    pub fn mtruth_with_budget(&self, a: &ModalFormula, budget: u64) -> TruthOutcome {
        let vars: Vec<PropVar> = a.vars().into_iter().collect();
        let full = self.full_mask();
        let mut assignment = vec![0u64; vars.len()];
        let mut masks: BTreeMap<PropVar, u64> = BTreeMap::new();
        let mut enumerated = 0u64;
        loop {
            if enumerated >= budget {
                return TruthOutcome::Exhausted { enumerated };
            }
            enumerated += 1;
            for (v, m) in vars.iter().zip(&assignment) {
                masks.insert(v.clone(), *m);
            }
            let d = self.mdenotation(&masks, a);
            if d != full {
                let point = (0..self.n()).find(|i| d >> i & 1 == 0).expect("nonfull");
                let env = Environment(
                    vars.iter()
                        .zip(&assignment)
                        .map(|(v, m)| (v.clone(), self.mask_to_names(*m)))
                        .collect(),
                );
                return TruthOutcome::False {
                    env,
                    point: self.names[point].clone(),
                };
            }
            // Odometer over all subset assignments.
            let mut i = 0;
            loop {
                if i == assignment.len() {
                    return TruthOutcome::True;
                }
                if assignment[i] == full {
                    assignment[i] = 0;
                    i += 1;
                } else {
                    assignment[i] += 1;
                    break;
                }
            }
        }
    }

    /// As [`MLFrame::mtruth_with_budget`] with the default budget.
    pub fn mtruth(&self, a: &ModalFormula) -> TruthOutcome {
        self.mtruth_with_budget(a, crate::semantics::DEFAULT_TRUTH_BUDGET)
    }
}

impl fmt::Display for MLFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (|R|={}, |e|={}, |inf|={})",
            self.label.as_deref().unwrap_or("frame"),
            self.n(),
            self.unit_set.count_ones(),
            self.infinity_set.count_ones()
        )
    }
}

// -- frame JSON -------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FrameJson {
    carrier: Vec<String>,
    unit_set: Vec<String>,
    infinity_set: Vec<String>,
    /// id → list of ids; a missing entry means −x = ∅.
    inv: BTreeMap<String, Vec<String>>,
    comp: Vec<(String, String, String)>,
    cowand: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Parses the UTF-8 JSON frame format. Unlike the model format, all
/// relations are listed explicitly (frames carry no implied closure).
pub fn frame_from_json(text: &str) -> Result<MLFrame, ModelError> {
    let j: FrameJson =
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let idx = |id: &str| -> Result<usize, ModelError> {
        j.carrier
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| ModelError::UnknownElement(id.into()))
    };
    let unit_set: Vec<usize> = j.unit_set.iter().map(|s| idx(s)).collect::<Result<_, _>>()?;
    let infinity_set: Vec<usize> = j
        .infinity_set
        .iter()
        .map(|s| idx(s))
        .collect::<Result<_, _>>()?;
    let mut inv = vec![Vec::new(); j.carrier.len()];
    for (id, img) in &j.inv {
        let x = idx(id)?;
        inv[x] = img.iter().map(|s| idx(s)).collect::<Result<_, _>>()?;
    }
    let triples = |list: &[(String, String, String)]| -> Result<Vec<(usize, usize, usize)>, ModelError> {
        list.iter()
            .map(|(x, y, z)| Ok((idx(x)?, idx(y)?, idx(z)?)))
            .collect()
    };
    MLFrame::from_parts(
        j.carrier.clone(),
        &unit_set,
        &infinity_set,
        &inv,
        &triples(&j.comp)?,
        &triples(&j.cowand)?,
        j.label,
    )
}

impl MLFrame {
    /// Serializes to the JSON frame format.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.n();
        let nm = |i: usize| self.names[i].clone();
        let set = |mask: u64| -> Vec<String> {
            (0..n).filter(|&i| mask >> i & 1 == 1).map(nm).collect()
        };
        let rel = |masks: &[u64]| {
            let mut out = Vec::new();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if masks[x * n + y] >> z & 1 == 1 {
                            out.push((nm(x), nm(y), nm(z)));
                        }
                    }
                }
            }
            out
        };
        let j = FrameJson {
            carrier: self.names.clone(),
            unit_set: set(self.unit_set),
            infinity_set: set(self.infinity_set),
            inv: (0..n)
                .filter(|&x| self.inv[x] != 0)
                .map(|x| (nm(x), set(self.inv[x])))
                .collect(),
            comp: rel(&self.comp),
            cowand: rel(&self.cowand),
            label: self.label.clone(),
        };
        serde_json::to_value(j).expect("frame serializes")
    }
}

/// The disjoint union of two frames, with all relations kept within their
/// side. Clashing element ids are disambiguated with `a.`/`b.` prefixes.
pub fn frame_disjoint_union(a: &MLFrame, b: &MLFrame) -> Result<MLFrame, ModelError> {
    let clash = a.names.iter().any(|id| b.names.contains(id));
    let rename = |prefix: &str, names: &[String]| -> Vec<String> {
        names
            .iter()
            .map(|id| {
                if clash {
                    format!("{prefix}{id}")
                } else {
                    id.clone()
                }
            })
            .collect()
    };
    let mut names = rename("a.", &a.names);
    names.extend(rename("b.", &b.names));
    let (na, n) = (a.n(), a.n() + b.n());
    let shift = |mask: u64, by: usize| -> u64 { mask << by };
    let mut frame = MLFrame {
        names,
        comp: vec![0u64; n * n],
        cowand: vec![0u64; n * n],
        unit_set: a.unit_set | shift(b.unit_set, na),
        infinity_set: a.infinity_set | shift(b.infinity_set, na),
        inv: Vec::with_capacity(n),
        label: None,
    };
    check_frame_carrier(&frame.names)?;
    for x in 0..na {
        frame.inv.push(a.inv[x]);
    }
    for x in 0..b.n() {
        frame.inv.push(shift(b.inv[x], na));
    }
    for x in 0..na {
        for y in 0..na {
            frame.comp[x * n + y] = a.comp_mask(x, y);
            frame.cowand[x * n + y] = a.cowand_mask(x, y);
        }
    }
    for x in 0..b.n() {
        for y in 0..b.n() {
            frame.comp[(na + x) * n + (na + y)] = shift(b.comp_mask(x, y), na);
            frame.cowand[(na + x) * n + (na + y)] = shift(b.cowand_mask(x, y), na);
        }
    }
    Ok(frame)
}

// ---------------------------------------------------------------------------
// The AX_CBI axioms
// ---------------------------------------------------------------------------

/// One of the eleven AX_CBI axiom schemata, numbered 1–11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AxiomId(pub u8);

impl AxiomId {
    /// The eleven axiom ids in order.
    pub const ALL: [AxiomId; 11] = [
        AxiomId(1),
        AxiomId(2),
        AxiomId(3),
        AxiomId(4),
        AxiomId(5),
        AxiomId(6),
        AxiomId(7),
        AxiomId(8),
        AxiomId(9),
        AxiomId(10),
        AxiomId(11),
    ];
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The eleven AX_CBI axiom schemata, indexed by `AxiomId(i).0 - 1`:
/// units (1, 2), commutativity (3), associativity (4, 5), the ∘/⊸
/// residuation pair (6, 7), involutivity of − (8, 9), and −P = P⊸∞ (10, 11).
const AXIOM_TEXTS: [&str; 11] = [
    "E o P -> P",
    "P -> E o P",
    "P o Q -> Q o P",
    "(P o Q) o R -> P o (Q o R)",
    "P o (Q o R) -> (P o Q) o R",
    "Q & (R o P) -> (R & (P o- Q)) o top",
    "R & (P o- Q) -> top o- (Q & (R o P))",
    "-.-.P -> P",
    "P -> -.-.P",
    "-.P -> (P o- INF)",
    "(P o- INF) -> -.P",
];

/// The ASCII text of an axiom schema.
pub fn axiom_text(id: AxiomId) -> &'static str {
    AXIOM_TEXTS[id.0 as usize - 1]
}

/// The parsed form of an axiom schema (over variables `P`, `Q`, `R`).
pub fn axiom_formula(id: AxiomId) -> ModalFormula {
    parse_modal_formula(axiom_text(id)).expect("axiom texts parse")
}

/// A falsifying instantiation of an axiom schema: variable assignments (as
/// element sets) and a point where the instance fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomWitness {
    pub env: Environment,
    pub point: String,
}

/// The verdict for one axiom schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: AxiomId,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AxiomWitness>,
}

/// The result of checking all eleven axiom schemata on a frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub unitary: bool,
    /// True when the carrier exceeds the exhaustive-instantiation limit and
    /// only a fixed random sample of instantiations was tested; a "holds"
    /// verdict is then not a guarantee (failures are still genuine).
    pub sampled: bool,
}

impl AxiomReport {
    /// Whether every axiom holds (under the checking mode used).
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// Whether the given axiom holds.
    pub fn holds(&self, id: AxiomId) -> bool {
        self.checks
            .iter()
            .find(|c| c.axiom == id)
            .is_some_and(|c| c.holds)
    }

    /// The lowest-numbered failing axiom, if any.
    pub fn first_failure(&self) -> Option<AxiomId> {
        self.checks.iter().find(|c| !c.holds).map(|c| c.axiom)
    }
}

/// Carrier size up to which axiom variables are instantiated over *all*
/// subsets; the 3-variable axioms then see at most (2^6)^3 instantiations.
pub const EXHAUSTIVE_AXIOM_CARRIER: usize = 6;

/// Number of random instantiations per axiom in sampling mode.
const AXIOM_SAMPLES: usize = 2048;

/// Checks the eleven AX_CBI axiom schemata on a frame, exhaustively over
/// all subset instantiations of their variables for carriers of size at
/// most [`EXHAUSTIVE_AXIOM_CARRIER`], and over a deterministic random
/// sample beyond that (flagged in [`AxiomReport::sampled`]).
pub fn check_axioms(fr: &MLFrame) -> AxiomReport {
    let sampled = fr.n() > EXHAUSTIVE_AXIOM_CARRIER;
    let mut rng = StdRng::seed_from_u64(0xCB1D);
    let full = fr.full_mask();
    let mut checks = Vec::new();
    for id in AxiomId::ALL {
        let a = axiom_formula(id);
        let (holds, witness) = if !sampled {
            // Exhaustive instantiation is exactly frame truth of the schema.
            match fr.mtruth_with_budget(&a, u64::MAX) {
                TruthOutcome::True => (true, None),
                TruthOutcome::False { env, point } => (false, Some(AxiomWitness { env, point })),
                TruthOutcome::Exhausted { .. } => unreachable!("finite enumeration"),
            }
        } else {
            let vars: Vec<PropVar> = a.vars().into_iter().collect();
            let mut found = None;
            for _ in 0..AXIOM_SAMPLES {
                let masks: BTreeMap<PropVar, u64> = vars
                    .iter()
                    .map(|v| (v.clone(), rng.gen::<u64>() & full))
                    .collect();
                let d = fr.mdenotation(&masks, &a);
                if d != full {
                    let point = (0..fr.n()).find(|i| d >> i & 1 == 0).expect("nonfull");
                    found = Some(AxiomWitness {
                        env: Environment(
                            masks
                                .iter()
                                .map(|(v, m)| (v.clone(), fr.mask_to_names(*m)))
                                .collect(),
                        ),
                        point: fr.names[point].clone(),
                    });
                    break;
                }
            }
            (found.is_none(), found)
        };
        checks.push(AxiomCheck {
            axiom: id,
            holds,
            witness,
        });
    }
    AxiomReport {
        checks,
        unitary: fr.is_unitary(),
        sampled,
    }
}

// ---------------------------------------------------------------------------
// Very simple Sahlqvist formulas
// ---------------------------------------------------------------------------

/// Whether `a` is a very simple Sahlqvist formula: an implication S → A⁺
/// whose antecedent S is built from ⊤, ⊥, variables, ∧, e, ∞, −, ∘, ⊸
/// only, and whose consequent A⁺ is positive (no variable occurs under an
/// odd number of negations, counting the antecedent position of → as a
/// negation).
pub fn is_very_simple_sahlqvist(a: &ModalFormula) -> bool {
    match a {
        ModalFormula::Imp(s, c) => sahlqvist_antecedent(s) && positive(c, true),
        _ => false,
    }
}

fn sahlqvist_antecedent(s: &ModalFormula) -> bool {
    use ModalFormula::*;
    match s {
        Top | Bot | Var(_) | UnitMod | InftyMod => true,
        InvMod(x) => sahlqvist_antecedent(x),
        And(x, y) | CompMod(x, y) | CoWandMod(x, y) => {
            sahlqvist_antecedent(x) && sahlqvist_antecedent(y)
        }
        Not(_) | Or(_, _) | Imp(_, _) => false,
    }
}

fn positive(a: &ModalFormula, pos: bool) -> bool {
    use ModalFormula::*;
    match a {
        Var(_) => pos,
        Top | Bot | UnitMod | InftyMod => true,
        Not(x) => positive(x, !pos),
        Imp(x, y) => positive(x, !pos) && positive(y, pos),
        InvMod(x) => positive(x, pos),
        And(x, y) | Or(x, y) | CompMod(x, y) | CoWandMod(x, y) => {
            positive(x, pos) && positive(y, pos)
        }
    }
}

// ---------------------------------------------------------------------------
// Formula translations
// ---------------------------------------------------------------------------

fn mnot(a: ModalFormula) -> ModalFormula {
    ModalFormula::Not(Box::new(a))
}
fn minv(a: ModalFormula) -> ModalFormula {
    ModalFormula::InvMod(Box::new(a))
}

/// The translation ⌊·⌋ from CBI-formulas to modal formulas: the additives
/// map homomorphically, ⊤* ↦ e, ⊥* ↦ ¬∞, ∼F ↦ ¬−⌊F⌋, F₁∗F₂ ↦ ⌊F₁⌋∘⌊F₂⌋,
/// F₁—∗F₂ ↦ ¬(⌊F₁⌋ ⊸ ¬⌊F₂⌋), and F₁⅋F₂ ↦ ¬−(¬−⌊F₁⌋ ∘ ¬−⌊F₂⌋).
pub fn embed_formula(f: &Formula) -> ModalFormula {
    use ModalFormula as M;
    match f {
        Formula::Var(p) => M::Var(p.clone()),
        Formula::Top => M::Top,
        Formula::Bot => M::Bot,
        Formula::Not(g) => mnot(embed_formula(g)),
        Formula::And(a, b) => M::And(Box::new(embed_formula(a)), Box::new(embed_formula(b))),
        Formula::Or(a, b) => M::Or(Box::new(embed_formula(a)), Box::new(embed_formula(b))),
        Formula::Imp(a, b) => M::Imp(Box::new(embed_formula(a)), Box::new(embed_formula(b))),
        Formula::MTop => M::UnitMod,
        Formula::MBot => mnot(M::InftyMod),
        Formula::MNot(g) => mnot(minv(embed_formula(g))),
        Formula::Star(a, b) => {
            M::CompMod(Box::new(embed_formula(a)), Box::new(embed_formula(b)))
        }
        Formula::Par(a, b) => mnot(minv(M::CompMod(
            Box::new(mnot(minv(embed_formula(a)))),
            Box::new(mnot(minv(embed_formula(b)))),
        ))),
        Formula::Wand(a, b) => mnot(M::CoWandMod(
            Box::new(embed_formula(a)),
            Box::new(mnot(embed_formula(b))),
        )),
    }
}

fn fnot(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}
fn fmnot(f: Formula) -> Formula {
    Formula::MNot(Box::new(f))
}

/// The translation ⌈·⌉ from modal formulas to CBI-formulas: the additives
/// map homomorphically, e ↦ ⊤*, ∞ ↦ ¬⊥*, −A ↦ ¬∼⌈A⌉, A₁∘A₂ ↦ ⌈A₁⌉∗⌈A₂⌉,
/// and A₁⊸A₂ ↦ ¬(⌈A₁⌉ —∗ ¬⌈A₂⌉).
pub fn revembed_formula(a: &ModalFormula) -> Formula {
    use ModalFormula as M;
    match a {
        M::Var(p) => Formula::Var(p.clone()),
        M::Top => Formula::Top,
        M::Bot => Formula::Bot,
        M::Not(b) => fnot(revembed_formula(b)),
        M::And(x, y) => Formula::And(
            Box::new(revembed_formula(x)),
            Box::new(revembed_formula(y)),
        ),
        M::Or(x, y) => Formula::Or(
            Box::new(revembed_formula(x)),
            Box::new(revembed_formula(y)),
        ),
        M::Imp(x, y) => Formula::Imp(
            Box::new(revembed_formula(x)),
            Box::new(revembed_formula(y)),
        ),
        M::UnitMod => Formula::MTop,
        M::InftyMod => fnot(Formula::MBot),
        M::InvMod(b) => fnot(fmnot(revembed_formula(b))),
        M::CompMod(x, y) => Formula::Star(
            Box::new(revembed_formula(x)),
            Box::new(revembed_formula(y)),
        ),
        M::CoWandMod(x, y) => fnot(Formula::Wand(
            Box::new(revembed_formula(x)),
            Box::new(fnot(revembed_formula(y))),
        )),
    }
}

// ---------------------------------------------------------------------------
// Model ↔ frame translations
// ---------------------------------------------------------------------------

/// Embeds a CBI-model as a unitary frame: `∘`, e, ∞, and − carry over (as
/// singleton-valued relations), and `⊸` is materialized from its defining
/// comprehension z ∈ x⊸y ⇔ y ∈ x∘z. The result passes [`check_axioms`]
/// entirely.
pub fn embed_model(m: &ResourceModel) -> MLFrame {
    let n = m.n();
    let mut comp = vec![0u64; n * n];
    let mut cowand = vec![0u64; n * n];
    for x in 0..n {
        for y in 0..n {
            comp[x * n + y] = m.comp_mask(x, y);
        }
    }
    for x in 0..n {
        for z in 0..n {
            let ys = m.comp_mask(x, z);
            for y in 0..n {
                if ys >> y & 1 == 1 {
                    cowand[x * n + y] |= 1 << z;
                }
            }
        }
    }
    MLFrame {
        names: m.names().to_vec(),
        comp,
        cowand,
        unit_set: 1 << m.unit(),
        infinity_set: 1 << m.infinity(),
        inv: (0..n).map(|x| 1u64 << m.inv_of(x)).collect(),
        label: m.label().map(String::from),
    }
}

/// Errors for the frame → model direction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModalError {
    #[error("frame is not unitary: |e| = {0}")]
    NonUnitary(u32),
    #[error("AX_CBI axiom {0} fails on the frame")]
    AxiomFails(AxiomId),
    #[error("frame does not collapse to a CBI-model: {0}")]
    Collapse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Collapses a unitary frame passing all AX_CBI axioms back to a CBI-model.
/// On such frames ∞ and every −x are singletons, so e, ∞, − collapse to an
/// element, an element, and a total map; the result validates as a
/// CBI-model, and the two directions are mutually inverse.
pub fn extract_cbi(fr: &MLFrame) -> Result<ResourceModel, ModalError> {
    let report = check_axioms(fr);
    if !report.unitary {
        return Err(ModalError::NonUnitary(fr.unit_set.count_ones()));
    }
    if let Some(id) = report.first_failure() {
        return Err(ModalError::AxiomFails(id));
    }
    let n = fr.n();
    let singleton = |mask: u64, what: &str| -> Result<usize, ModalError> {
        if mask.count_ones() == 1 {
            Ok(mask.trailing_zeros() as usize)
        } else {
            Err(ModalError::Collapse(format!(
                "{what} is not a singleton (cardinality {})",
                mask.count_ones()
            )))
        }
    };
    let unit = singleton(fr.unit_set, "e")?;
    let infinity = singleton(fr.infinity_set, "infinity")?;
    let mut inv = Vec::with_capacity(n);
    for x in 0..n {
        inv.push(singleton(fr.inv[x], &format!("-{}", fr.names[x]))?);
    }
    let mut triples = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let zs = fr.comp_mask(x, y);
            for z in 0..n {
                if zs >> z & 1 == 1 {
                    triples.push((x, y, z));
                }
            }
        }
    }
    let m = ResourceModel::from_parts(
        fr.names.clone(),
        unit,
        infinity,
        inv,
        &triples,
        fr.label.clone(),
    )?;
    let validation = m.validate_cbi();
    if let Some(failure) = validation.failures.first() {
        // Reachable only in sampling mode, where axiom failures can be
        // missed; the collapsed model is still fully validated.
        return Err(ModalError::Collapse(format!(
            "{} fails at ({})",
            failure.axiom,
            failure.witness.join(",")
        )));
    }
    Ok(m)
}

/// Decomposes a frame satisfying the relational-monoid axioms (1–5) into
/// its unitary components M_x for x ∈ e, where M_x restricts the frame to
/// R_x = {r | r∘x ≠ ∅}. The component carriers partition R, and a formula
/// is true on the frame iff it is true on every component.
pub fn decompose_unitary(fr: &MLFrame) -> Result<Vec<MLFrame>, ModalError> {
    let report = check_axioms(fr);
    for id in &AxiomId::ALL[..5] {
        if !report.holds(*id) {
            return Err(ModalError::AxiomFails(*id));
        }
    }
    let n = fr.n();
    let units: Vec<usize> = (0..n).filter(|&x| fr.unit_set >> x & 1 == 1).collect();
    let mut seen = 0u64;
    let mut components = Vec::new();
    for &x in &units {
        let rx: u64 = (0..n)
            .filter(|&r| fr.comp_mask(r, x) != 0)
            .fold(0, |acc, r| acc | 1 << r);
        if seen & rx != 0 {
            return Err(ModalError::Collapse(
                "component carriers are not disjoint".into(),
            ));
        }
        seen |= rx;
        components.push((x, rx));
    }
    if seen != fr.full_mask() {
        return Err(ModalError::Collapse(
            "component carriers do not cover the frame".into(),
        ));
    }
    let mut out = Vec::new();
    for (x, rx) in components {
        let elems: Vec<usize> = (0..n).filter(|&r| rx >> r & 1 == 1).collect();
        let remap = |mask: u64| -> u64 {
            let mut out = 0u64;
            for (i, &e) in elems.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    out |= 1 << i;
                }
            }
            out
        };
        let k = elems.len();
        let mut sub = MLFrame {
            names: elems.iter().map(|&e| fr.names[e].clone()).collect(),
            comp: vec![0u64; k * k],
            cowand: vec![0u64; k * k],
            unit_set: remap(1 << x),
            infinity_set: remap(fr.infinity_set & rx),
            inv: elems.iter().map(|&e| remap(fr.inv[e] & rx)).collect(),
            label: fr.label.clone(),
        };
        for (i, &ei) in elems.iter().enumerate() {
            for (j, &ej) in elems.iter().enumerate() {
                sub.comp[i * k + j] = remap(fr.comp_mask(ei, ej) & rx);
                sub.cowand[i * k + j] = remap(fr.cowand_mask(ei, ej) & rx);
            }
        }
        out.push(sub);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::standard_models;
    use crate::formula::parse_formula;
    use crate::semantics::z_mod;
    use proptest::prelude::*;

    fn mp(s: &str) -> ModalFormula {
        parse_modal_formula(s).unwrap()
    }

    fn fp(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn modal_grammar_tokens_and_precedence() {
        assert_eq!(mp("E"), ModalFormula::UnitMod);
        assert_eq!(mp("INF"), ModalFormula::InftyMod);
        assert_eq!(mp("∞"), ModalFormula::InftyMod);
        assert_eq!(
            mp("-.P"),
            ModalFormula::InvMod(Box::new(ModalFormula::var("P")))
        );
        // Unary binds tighter than the modal level, which binds tighter
        // than & and |; `o` and `o-` share a left-associative level.
        assert_eq!(mp("-.P o Q"), mp("(-.P) o Q"));
        assert_eq!(mp("P o Q & R"), mp("(P o Q) & R"));
        assert_eq!(mp("P & Q | R"), mp("(P & Q) | R"));
        assert_eq!(mp("P o Q o R"), mp("(P o Q) o R"));
        assert_eq!(mp("P o Q o- R"), mp("(P o Q) o- R"));
        assert_eq!(mp("P o- Q o R"), mp("(P o- Q) o R"));
        assert_eq!(mp("P -> Q -> R"), mp("P -> (Q -> R)"));
        assert_eq!(mp("-.-.P"), mp("-.(-.P)"));
        assert_eq!(mp("P <-> Q"), mp("(P -> Q) & (Q -> P)"));
        assert_eq!(mp("P ∘ Q ⊸ −R"), mp("P o Q o- -.R"));
    }

    #[test]
    fn modal_parse_errors_carry_offset() {
        let e = parse_modal_formula("P o o Q").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_modal_formula("P -* Q").unwrap_err();
        assert!(e.offset > 0);
    }

    #[test]
    fn modal_render_round_trips_and_styles() {
        for s in [
            "E o P -> P",
            "-.-.P -> P",
            "!(P o- !Q)",
            "Q & (R o P) -> (R & (P o- Q)) o top",
            "P o (Q o R) -> (P o Q) o R",
            "-.(P | Q) <-> -.P | -.Q",
        ] {
            let a = mp(s);
            assert_eq!(mp(&render_modal(&a, RenderStyle::Ascii)), a, "{s}");
        }
        assert_eq!(render_modal(&mp("-.P o- INF"), RenderStyle::Unicode), "−P ⊸ ∞");
        assert_eq!(
            render_modal(&mp("E o P -> P"), RenderStyle::Latex),
            "e \\circ P \\rightarrow P"
        );
    }

    #[test]
    fn embed_formula_matches_the_table() {
        assert_eq!(embed_formula(&fp("coemp")), mp("!INF"));
        assert_eq!(embed_formula(&fp("emp")), mp("E"));
        assert_eq!(embed_formula(&fp("~P")), mp("!-.P"));
        assert_eq!(embed_formula(&fp("P * Q")), mp("P o Q"));
        assert_eq!(embed_formula(&fp("P -* Q")), mp("!(P o- !Q)"));
        assert_eq!(embed_formula(&fp("P |* Q")), mp("!-.(!-.P o !-.Q)"));
        assert_eq!(embed_formula(&fp("P -> Q & !R")), mp("P -> Q & !R"));
    }

    #[test]
    fn revembed_formula_matches_the_table() {
        assert_eq!(revembed_formula(&mp("E")), fp("emp"));
        assert_eq!(revembed_formula(&mp("INF")), fp("!coemp"));
        assert_eq!(revembed_formula(&mp("-.P")), fp("!~P"));
        assert_eq!(revembed_formula(&mp("P o Q")), fp("P * Q"));
        assert_eq!(revembed_formula(&mp("P o- Q")), fp("!(P -* !Q)"));
        assert_eq!(
            revembed_formula(&embed_formula(&fp("P |* Q"))),
            fp("!!~(!!~P * !!~Q)")
        );
    }

    /// The composite ⌈⌊·⌋⌉ as a direct structural recursion; the round trip
    /// through the two translations must match it syntactically.
    fn composite(f: &Formula) -> Formula {
        use Formula::*;
        let b = |f: &Formula| Box::new(composite(f));
        match f {
            Var(_) | Top | Bot | MTop => f.clone(),
            Not(g) => Not(b(g)),
            And(x, y) => And(b(x), b(y)),
            Or(x, y) => Or(b(x), b(y)),
            Imp(x, y) => Imp(b(x), b(y)),
            Star(x, y) => Star(b(x), b(y)),
            MBot => fnot(fnot(MBot)),
            MNot(g) => fnot(fnot(fmnot(composite(g)))),
            Wand(x, y) => fnot(fnot(Wand(b(x), Box::new(fnot(fnot(composite(y))))))),
            Par(x, y) => fnot(fnot(fmnot(Star(
                Box::new(fnot(fnot(fmnot(composite(x))))),
                Box::new(fnot(fnot(fmnot(composite(y))))),
            )))),
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::var("P")),
            Just(Formula::var("Q")),
            Just(Formula::Top),
            Just(Formula::Bot),
            Just(Formula::MTop),
            Just(Formula::MBot),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                inner.clone().prop_map(|f| Formula::MNot(Box::new(f))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Imp(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Star(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Par(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Wand(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

        #[test]
        fn composite_table_matches_round_trip(f in arb_formula()) {
            prop_assert_eq!(revembed_formula(&embed_formula(&f)), composite(&f));
        }

        /// Pointwise transfer: the denotation of a CBI-formula on a model
        /// equals the denotation of its translation on the embedded frame,
        /// under every environment.
        #[test]
        fn pointwise_transfer_on_fixture_models(
            f in arb_formula(),
            which in 0usize..8,
            pm in any::<u64>(),
            qm in any::<u64>(),
        ) {
            let models = standard_models();
            let m = &models[which % models.len()];
            let fr = embed_model(m);
            let full = m.full_mask();
            let env: BTreeMap<PropVar, u64> = [
                (PropVar::new("P"), pm & full),
                (PropVar::new("Q"), qm & full),
            ]
            .into_iter()
            .collect();
            prop_assert_eq!(
                m.denotation(&env, &f),
                fr.mdenotation(&env, &embed_formula(&f))
            );
        }

        /// Every modality is a diamond, hence monotone in each argument.
        #[test]
        fn modalities_are_monotone(
            which in 0usize..8,
            am in any::<u64>(),
            bm in any::<u64>(),
            cm in any::<u64>(),
        ) {
            let models = standard_models();
            let fr = embed_model(&models[which % models.len()]);
            let full = fr.full_mask();
            let (a, ab, c) = (am & full, (am | bm) & full, cm & full);
            let env = |x: u64, y: u64| -> BTreeMap<PropVar, u64> {
                [(PropVar::new("A"), x), (PropVar::new("C"), y)]
                    .into_iter()
                    .collect()
            };
            for text in ["-.A", "A o C", "C o A", "A o- C", "C o- A"] {
                let m = mp(text);
                let small = fr.mdenotation(&env(a, c), &m);
                let large = fr.mdenotation(&env(ab, c), &m);
                prop_assert_eq!(small & !large, 0, "{} not monotone", text);
            }
        }
    }

    #[test]
    fn truth_transfer_on_fixture_models() {
        let formulas = [
            "emp", "coemp", "top", "bot", "P -> P", "P & Q -> Q & P",
            "P * Q -> Q * P", "~~P <-> P", "P |* Q -> (~P -* Q)",
            "emp -> !coemp", "!(!coemp -* !emp)", "P -* Q",
        ];
        for m in standard_models() {
            let fr = embed_model(&m);
            for text in formulas {
                let f = fp(text);
                assert_eq!(
                    m.truth(&f).is_true(),
                    fr.mtruth(&embed_formula(&f)).is_true(),
                    "{text} on {m}"
                );
            }
        }
    }

    #[test]
    fn msat_examples_on_embedded_two_chain() {
        let fr = embed_model(&z_mod(2, 1).unwrap());
        let env = Environment::new();
        assert!(fr.msat(&env, "1", &mp("INF")).unwrap());
        assert!(!fr.msat(&env, "0", &mp("INF")).unwrap());
        assert!(fr.msat(&env, "0", &mp("E")).unwrap());
        assert!(fr.msat(&env, "1", &mp("-.E")).unwrap());
        assert!(matches!(
            fr.msat(&env, "7", &mp("E")),
            Err(ModelError::UnknownElement(_))
        ));
    }

    #[test]
    fn embedded_cowand_is_the_residual_of_comp() {
        for m in standard_models() {
            let fr = embed_model(&m);
            let n = fr.n();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        assert_eq!(
                            fr.cowand_mask(x, y) >> z & 1 == 1,
                            m.comp_mask(x, z) >> y & 1 == 1,
                            "x={x} y={y} z={z} on {m}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn embedded_fixtures_pass_all_axioms() {
        for m in standard_models() {
            let fr = embed_model(&m);
            let report = check_axioms(&fr);
            assert!(report.unitary, "{m}");
            assert!(report.all_hold(), "{m}: {:?}", report.first_failure());
        }
    }

    #[test]
    fn broken_commutativity_fails_axiom_three_with_witness() {
        // 0∘1 = {1} but 1∘0 = ∅.
        let fr = MLFrame::from_parts(
            vec!["0".into(), "1".into()],
            &[0],
            &[1],
            &[vec![1], vec![0]],
            &[(0, 0, 0), (0, 1, 1), (1, 1, 0)],
            &[],
            None,
        )
        .unwrap();
        let report = check_axioms(&fr);
        let check = &report.checks[2];
        assert_eq!(check.axiom, AxiomId(3));
        assert!(!check.holds);
        assert!(check.witness.is_some());
    }

    #[test]
    fn empty_unit_set_is_not_unitary() {
        let fr = MLFrame::from_parts(
            vec!["0".into()],
            &[],
            &[0],
            &[vec![0]],
            &[(0, 0, 0)],
            &[],
            None,
        )
        .unwrap();
        assert!(!check_axioms(&fr).unitary);
    }

    #[test]
    fn axioms_are_very_simple_sahlqvist() {
        for id in AxiomId::ALL {
            assert!(
                is_very_simple_sahlqvist(&axiom_formula(id)),
                "axiom {id}"
            );
        }
        assert!(!is_very_simple_sahlqvist(&mp("!P -> P")));
        assert!(is_very_simple_sahlqvist(&mp("P o Q -> !!P")));
        assert!(!is_very_simple_sahlqvist(&mp("P o Q -> !P")));
        assert!(!is_very_simple_sahlqvist(&mp("P & Q")));
        // A variable in the antecedent of a consequent implication counts
        // as negated once.
        assert!(!is_very_simple_sahlqvist(&mp("P -> (Q -> bot)")));
        assert!(is_very_simple_sahlqvist(&mp("P -> ((Q -> bot) -> bot)")));
    }

    #[test]
    fn model_frame_round_trips() {
        for m in standard_models() {
            let fr = embed_model(&m);
            let back = extract_cbi(&fr).unwrap();
            assert_eq!(back, m);
            assert_eq!(embed_model(&back), fr);
        }
    }

    #[test]
    fn extract_rejects_non_unitary_frames() {
        let a = embed_model(&z_mod(2, 1).unwrap());
        let union = frame_disjoint_union(&a, &embed_model(&z_mod(1, 0).unwrap())).unwrap();
        assert!(matches!(extract_cbi(&union), Err(ModalError::NonUnitary(2))));
    }

    #[test]
    fn extract_rejects_axiom_failure_by_number() {
        // Tamper with −0 so that −−{0} = {0,1} ⊄ {0}: axiom 8 fails (and
        // is reported first; axioms 1-7 do not mention −).
        let base = embed_model(&z_mod(2, 1).unwrap());
        let mut comp = Vec::new();
        let mut cowand = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    if base.comp_mask(x, y) >> z & 1 == 1 {
                        comp.push((x, y, z));
                    }
                    if base.cowand_mask(x, y) >> z & 1 == 1 {
                        cowand.push((x, y, z));
                    }
                }
            }
        }
        let fr = MLFrame::from_parts(
            base.names().to_vec(),
            &[0],
            &[1],
            &[vec![0, 1], vec![1]],
            &comp,
            &cowand,
            None,
        )
        .unwrap();
        assert!(matches!(
            extract_cbi(&fr),
            Err(ModalError::AxiomFails(AxiomId(8)))
        ));
    }

    #[test]
    fn unitary_frames_decompose_to_themselves() {
        let fr = embed_model(&z_mod(4, 2).unwrap());
        let parts = decompose_unitary(&fr).unwrap();
        assert_eq!(parts, vec![fr]);
    }

    #[test]
    fn two_unit_frame_decomposes_into_unitary_components() {
        let a = embed_model(&z_mod(2, 1).unwrap());
        let b = embed_model(&z_mod(3, 1).unwrap());
        let union = frame_disjoint_union(&a, &b).unwrap();
        let report = check_axioms(&union);
        assert!(report.all_hold() && !report.unitary);
        let parts = decompose_unitary(&union).unwrap();
        assert_eq!(parts.len(), 2);
        let mut total = 0;
        for part in &parts {
            assert!(part.is_unitary());
            assert!(check_axioms(part).all_hold());
            total += part.n();
        }
        assert_eq!(total, union.n());
        // A formula is true on the union iff it is true on every component.
        for text in ["E", "INF", "-.-.P <-> P", "E o P -> P", "P o- INF -> -.P"] {
            let m = mp(text);
            assert_eq!(
                union.mtruth(&m).is_true(),
                parts.iter().all(|p| p.mtruth(&m).is_true()),
                "{text}"
            );
        }
    }

    #[test]
    fn generic_distribution_laws_hold_on_embedded_frames() {
        // The K-style axioms for the diamond modalities: strictness over ⊥
        // and distribution over ∨, checked as denotation identities.
        let mut rng = StdRng::seed_from_u64(7);
        for m in standard_models() {
            let fr = embed_model(&m);
            let full = fr.full_mask();
            for _ in 0..16 {
                let env: BTreeMap<PropVar, u64> = [
                    (PropVar::new("P"), rand::Rng::gen::<u64>(&mut rng) & full),
                    (PropVar::new("Q"), rand::Rng::gen::<u64>(&mut rng) & full),
                    (PropVar::new("R"), rand::Rng::gen::<u64>(&mut rng) & full),
                ]
                .into_iter()
                .collect();
                let d = |s: &str| fr.mdenotation(&env, &mp(s));
                assert_eq!(d("-.bot"), 0);
                assert_eq!(d("P o bot"), 0);
                assert_eq!(d("(bot o- P) | (P o- bot)"), 0);
                assert_eq!(d("-.(P | Q)"), d("-.P | -.Q"));
                assert_eq!(d("(P | Q) o R"), d("(P o R) | (Q o R)"));
                assert_eq!(d("(P | Q) o- R"), d("(P o- R) | (Q o- R)"));
                assert_eq!(d("P o- (Q | R)"), d("(P o- Q) | (P o- R)"));
            }
        }
    }

    #[test]
    fn frame_json_round_trips() {
        let fr = embed_model(&z_mod(4, 2).unwrap()).with_label("four-chain");
        let text = serde_json::to_string(&fr.to_json()).unwrap();
        assert_eq!(frame_from_json(&text).unwrap(), fr);
        // Spot-check the shape of the serialized form.
        let v = fr.to_json();
        assert_eq!(v["unit_set"], serde_json::json!(["0"]));
        assert_eq!(v["infinity_set"], serde_json::json!(["2"]));
        assert_eq!(v["inv"]["1"], serde_json::json!(["1"]));
    }

    #[test]
    fn frame_json_rejects_bad_input() {
        assert!(frame_from_json("{").is_err());
        let missing = r#"{"carrier":["0"],"unit_set":["9"],"infinity_set":[],"inv":{},"comp":[],"cowand":[]}"#;
        assert!(matches!(
            frame_from_json(missing),
            Err(ModelError::UnknownElement(_))
        ));
    }
}
