//! The display calculus DL_CBI.
//!
//! Consecutions `X ⊢ Y` relate *structures*: trees built from formulas with
//! the additive connectives `∅` (written `AE`), `♯` (`#`), `;` and the
//! multiplicative connectives `⊘` (`ME`), `♭` (`%`), `,`. The module provides
//!
//! - the twelve display postulates and [`apply_postulate`];
//! - the display theorem as an algorithm ([`display_at`]), returning a
//!   replayable postulate trace;
//! - the proof rules as a declarative schema table, a rule-instance checker
//!   and a whole-proof checker ([`check_proof`]);
//! - cut-free identity proofs for arbitrary formulas ([`identity_proof`]);
//! - a static audit of the Belnap cut-elimination conditions
//!   ([`audit_belnap_conditions`]).
//!
//! Proofs serialize to JSON; `≡D` nodes carry an explicit ordered postulate
//! trace so that checking never needs search.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::formula::{parse_formula, render, Formula, RenderStyle};
use crate::semantics::{ResourceModel, TruthOutcome};

/// A structure: the tree-shaped context of a consecution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure {
    /// A formula leaf.
    Leaf(Formula),
    /// The additive empty structure `∅` (ASCII `AE`).
    AEmpty,
    /// Additive negation `♯X` (ASCII `#`).
    Sharp(Box<Structure>),
    /// Additive pairing `X ; Y`.
    Semi(Box<Structure>, Box<Structure>),
    /// The multiplicative empty structure `⊘` (ASCII `ME`).
    MEmpty,
    /// Multiplicative negation `♭X` (ASCII `%`).
    Flat(Box<Structure>),
    /// Multiplicative pairing `X , Y`.
    Comma(Box<Structure>, Box<Structure>),
}

/// Shorthand constructors.
impl Structure {
    pub fn leaf(f: Formula) -> Structure {
        Structure::Leaf(f)
    }

    pub fn var(name: &str) -> Structure {
        Structure::Leaf(Formula::var(name))
    }

    pub fn sharp(x: Structure) -> Structure {
        Structure::Sharp(Box::new(x))
    }

    pub fn flat(x: Structure) -> Structure {
        Structure::Flat(Box::new(x))
    }

    pub fn semi(a: Structure, b: Structure) -> Structure {
        Structure::Semi(Box::new(a), Box::new(b))
    }

    pub fn comma(a: Structure, b: Structure) -> Structure {
        Structure::Comma(Box::new(a), Box::new(b))
    }

    /// Node count of the structure tree (formula leaves count 1).
    pub fn size(&self) -> usize {
        match self {
            Structure::Leaf(_) | Structure::AEmpty | Structure::MEmpty => 1,
            Structure::Sharp(x) | Structure::Flat(x) => 1 + x.size(),
            Structure::Semi(a, b) | Structure::Comma(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// All formula occurrences in the structure.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_formulas(&mut out);
        out
    }

    fn collect_formulas<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Structure::Leaf(f) => out.push(f),
            Structure::AEmpty | Structure::MEmpty => {}
            Structure::Sharp(x) | Structure::Flat(x) => x.collect_formulas(out),
            Structure::Semi(a, b) | Structure::Comma(a, b) => {
                a.collect_formulas(out);
                b.collect_formulas(out);
            }
        }
    }

    /// ASCII rendering: `AE`, `ME`, `#`, `%`, `;`, `,`, with explicit
    /// parentheses around nested pairings so that [`parse_structure`]
    /// round-trips.
    pub fn render(&self) -> String {
        fn needs_parens_under_prefix(s: &Structure) -> bool {
            match s {
                Structure::AEmpty | Structure::MEmpty => false,
                Structure::Sharp(_) | Structure::Flat(_) => false,
                Structure::Semi(_, _) | Structure::Comma(_, _) => true,
                // Formula renderings with operators contain spaces; only bare
                // atoms are safe without parentheses after `#`/`%`.
                Structure::Leaf(f) => !matches!(
                    f,
                    Formula::Var(_)
                        | Formula::Top
                        | Formula::Bot
                        | Formula::MTop
                        | Formula::MBot
                ),
            }
        }
        fn go(s: &Structure, out: &mut String) {
            match s {
                Structure::Leaf(f) => out.push_str(&render(f, RenderStyle::Ascii)),
                Structure::AEmpty => out.push_str("AE"),
                Structure::MEmpty => out.push_str("ME"),
                Structure::Sharp(x) | Structure::Flat(x) => {
                    out.push(if matches!(s, Structure::Sharp(_)) { '#' } else { '%' });
                    if needs_parens_under_prefix(x) {
                        out.push('(');
                        go(x, out);
                        out.push(')');
                    } else {
                        go(x, out);
                    }
                }
                Structure::Semi(a, b) | Structure::Comma(a, b) => {
                    let op = if matches!(s, Structure::Semi(_, _)) { ';' } else { ',' };
                    for (i, c) in [a, b].into_iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                            out.push(op);
                            out.push(' ');
                        }
                        if matches!(**c, Structure::Semi(_, _) | Structure::Comma(_, _)) {
                            out.push('(');
                            go(c, out);
                            out.push(')');
                        } else {
                            go(c, out);
                        }
                    }
                }
            }
        }
        let mut out = String::new();
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(1))?;
        match self {
            Structure::Leaf(f) => m.serialize_entry("f", &render(f, RenderStyle::Ascii))?,
            Structure::AEmpty => m.serialize_entry("ae", &())?,
            Structure::MEmpty => m.serialize_entry("me", &())?,
            Structure::Sharp(x) => m.serialize_entry("sharp", x)?,
            Structure::Flat(x) => m.serialize_entry("flat", x)?,
            Structure::Semi(a, b) => m.serialize_entry("semi", &(a, b))?,
            Structure::Comma(a, b) => m.serialize_entry("comma", &(a, b))?,
        }
        m.end()
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum StructureRepr {
    F(String),
    Ae(()),
    Me(()),
    Sharp(Box<StructureRepr>),
    Flat(Box<StructureRepr>),
    Semi(Box<StructureRepr>, Box<StructureRepr>),
    Comma(Box<StructureRepr>, Box<StructureRepr>),
}

impl StructureRepr {
    fn build(self) -> Result<Structure, crate::formula::ParseError> {
        Ok(match self {
            StructureRepr::F(text) => Structure::Leaf(parse_formula(&text)?),
            StructureRepr::Ae(()) => Structure::AEmpty,
            StructureRepr::Me(()) => Structure::MEmpty,
            StructureRepr::Sharp(x) => Structure::sharp(x.build()?),
            StructureRepr::Flat(x) => Structure::flat(x.build()?),
            StructureRepr::Semi(a, b) => Structure::semi(a.build()?, b.build()?),
            StructureRepr::Comma(a, b) => Structure::comma(a.build()?, b.build()?),
        })
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        StructureRepr::deserialize(d)?
            .build()
            .map_err(|e| D::Error::custom(format!("formula leaf: {e}")))
    }
}

/// A consecution `lhs ⊢ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Consecution {
    pub lhs: Structure,
    pub rhs: Structure,
}

impl Consecution {
    pub fn new(lhs: Structure, rhs: Structure) -> Consecution {
        Consecution { lhs, rhs }
    }

    /// ASCII rendering `lhs |- rhs`.
    pub fn render(&self) -> String {
        format!("{} |- {}", self.lhs.render(), self.rhs.render())
    }

    /// The constituent addressed by a path, if it resolves.
    pub fn at(&self, p: &Path) -> Result<&Structure, DisplayError> {
        let mut cur = match p.side {
            Side::Lhs => &self.lhs,
            Side::Rhs => &self.rhs,
        };
        for step in &p.steps {
            cur = match (step, cur) {
                (PathStep::Left, Structure::Semi(a, _)) => a,
                (PathStep::Left, Structure::Comma(a, _)) => a,
                (PathStep::Right, Structure::Semi(_, b)) => b,
                (PathStep::Right, Structure::Comma(_, b)) => b,
                (PathStep::IntoSharp, Structure::Sharp(x)) => x,
                (PathStep::IntoFlat, Structure::Flat(x)) => x,
                _ => return Err(DisplayError::DanglingPath),
            };
        }
        Ok(cur)
    }

    /// Paths to every constituent of the consecution (both whole sides
    /// included).
    pub fn constituent_paths(&self) -> Vec<Path> {
        fn walk(s: &Structure, side: Side, prefix: &mut Vec<PathStep>, out: &mut Vec<Path>) {
            out.push(Path { side, steps: prefix.clone() });
            match s {
                Structure::Leaf(_) | Structure::AEmpty | Structure::MEmpty => {}
                Structure::Sharp(x) => {
                    prefix.push(PathStep::IntoSharp);
                    walk(x, side, prefix, out);
                    prefix.pop();
                }
                Structure::Flat(x) => {
                    prefix.push(PathStep::IntoFlat);
                    walk(x, side, prefix, out);
                    prefix.pop();
                }
                Structure::Semi(a, b) | Structure::Comma(a, b) => {
                    prefix.push(PathStep::Left);
                    walk(a, side, prefix, out);
                    prefix.pop();
                    prefix.push(PathStep::Right);
                    walk(b, side, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.lhs, Side::Lhs, &mut Vec::new(), &mut out);
        walk(&self.rhs, Side::Rhs, &mut Vec::new(), &mut out);
        out
    }

    /// All formula occurrences on both sides.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = self.lhs.formulas();
        out.extend(self.rhs.formulas());
        out
    }
}

impl fmt::Display for Consecution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Errors from structure parsing, path resolution and proof checking.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DisplayError {
    #[error("structure syntax: {0}")]
    Parse(String),
    #[error("path does not resolve to a constituent")]
    DanglingPath,
    #[error("postulate {name} ({direction}) does not apply: expected {expected}")]
    ShapeMismatch {
        name: PostulateName,
        direction: Direction,
        expected: &'static str,
    },
    #[error("rule {rule}: {detail}")]
    Rule { rule: RuleName, detail: String },
}

/// One side of a consecution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

/// One step of a constituent path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStep {
    IntoSharp,
    IntoFlat,
    Left,
    Right,
}

/// An address of one constituent of a consecution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub side: Side,
    pub steps: Vec<PathStep>,
}

impl Path {
    pub fn new(side: Side, steps: Vec<PathStep>) -> Path {
        Path { side, steps }
    }

    /// The whole named side.
    pub fn whole(side: Side) -> Path {
        Path { side, steps: Vec::new() }
    }
}

/// Antecedent or consequent part, by the parity of surrounding `♯`/`♭`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Antecedent,
    Consequent,
}

/// Classifies the constituent at `p`: antecedent parts are those positive in
/// the left-hand side or negative in the right-hand side, where each
/// surrounding `♯` or `♭` flips polarity.
pub fn classify_part(c: &Consecution, p: &Path) -> Result<Part, DisplayError> {
    c.at(p)?;
    let flips = p
        .steps
        .iter()
        .filter(|s| matches!(s, PathStep::IntoSharp | PathStep::IntoFlat))
        .count();
    let positive = flips % 2 == 0;
    Ok(if (p.side == Side::Lhs) == positive {
        Part::Antecedent
    } else {
        Part::Consequent
    })
}

/// The twelve display postulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum PostulateName {
    AD1a,
    AD1b,
    AD2a,
    AD2b,
    AD3a,
    AD3b,
    MD1a,
    MD1b,
    MD2a,
    MD2b,
    MD3a,
    MD3b,
}

impl fmt::Display for PostulateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Orientation of a bidirectional rule or postulate: `Forward` reads the
/// schema top-to-bottom as printed, `Backward` swaps premise and conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "bwd")]
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        })
    }
}

/// One oriented application of a display postulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PostulateStep {
    pub name: PostulateName,
    pub direction: Direction,
}

impl PostulateStep {
    pub fn fwd(name: PostulateName) -> PostulateStep {
        PostulateStep { name, direction: Direction::Forward }
    }

    pub fn bwd(name: PostulateName) -> PostulateStep {
        PostulateStep { name, direction: Direction::Backward }
    }

    /// The inverse step: same postulate, opposite orientation.
    pub fn invert(self) -> PostulateStep {
        PostulateStep { name: self.name, direction: self.direction.flip() }
    }
}

/// Applies one display postulate at the top level of a consecution.
///
/// The postulate families relate, reading each three-line figure
/// top/middle/bottom:
///
/// - `AD1`: `X;Y ⊢ Z` ⇌ `X ⊢ ♯Y;Z` ⇌ `Y;X ⊢ Z` (rule `a` is the upper pair,
///   rule `b` the lower);
/// - `AD2`: `X ⊢ Y;Z` ⇌ `X;♯Y ⊢ Z` ⇌ `X ⊢ Z;Y`;
/// - `AD3`: `X ⊢ Y` ⇌ `♯Y ⊢ ♯X` ⇌ `♯♯X ⊢ Y`;
///
/// and `MD1`–`MD3` are the same shapes with `,`/`♭`.
pub fn apply_postulate(c: &Consecution, step: PostulateStep) -> Result<Consecution, DisplayError> {
    use Direction::*;
    use PostulateName::*;
    use Structure as St;
    let fail = |expected: &'static str| DisplayError::ShapeMismatch {
        name: step.name,
        direction: step.direction,
        expected,
    };
    // The additive and multiplicative families are isomorphic; `additive`
    // selects which pairing/negation constructors the postulate works on.
    let additive = matches!(step.name, AD1a | AD1b | AD2a | AD2b | AD3a | AD3b);
    let pair = |a: St, b: St| if additive { St::semi(a, b) } else { St::comma(a, b) };
    let neg = |x: St| if additive { St::sharp(x) } else { St::flat(x) };
    let split_pair = |s: &St| -> Option<(St, St)> {
        match (additive, s) {
            (true, St::Semi(a, b)) => Some(((**a).clone(), (**b).clone())),
            (false, St::Comma(a, b)) => Some(((**a).clone(), (**b).clone())),
            _ => None,
        }
    };
    let split_neg = |s: &St| -> Option<St> {
        match (additive, s) {
            (true, St::Sharp(x)) => Some((**x).clone()),
            (false, St::Flat(x)) => Some((**x).clone()),
            _ => None,
        }
    };
    let family = match step.name {
        AD1a | MD1a => 0,
        AD1b | MD1b => 1,
        AD2a | MD2a => 2,
        AD2b | MD2b => 3,
        AD3a | MD3a => 4,
        AD3b | MD3b => 5,
    };
    let out = match (family, step.direction) {
        // 1a fwd: X;Y ⊢ Z  →  X ⊢ ♯Y;Z
        (0, Forward) => {
            let (x, y) = split_pair(&c.lhs).ok_or_else(|| fail("a pairing on the left"))?;
            Consecution::new(x, pair(neg(y), c.rhs.clone()))
        }
        // 1a bwd: X ⊢ ♯Y;Z  →  X;Y ⊢ Z
        (0, Backward) => {
            let (ny, z) =
                split_pair(&c.rhs).ok_or_else(|| fail("a pairing on the right"))?;
            let y = split_neg(&ny)
                .ok_or_else(|| fail("a negated first component on the right"))?;
            Consecution::new(pair(c.lhs.clone(), y), z)
        }
        // 1b fwd: X ⊢ ♯Y;Z  →  Y;X ⊢ Z
        (1, Forward) => {
            let (ny, z) =
                split_pair(&c.rhs).ok_or_else(|| fail("a pairing on the right"))?;
            let y = split_neg(&ny)
                .ok_or_else(|| fail("a negated first component on the right"))?;
            Consecution::new(pair(y, c.lhs.clone()), z)
        }
        // 1b bwd: Y;X ⊢ Z  →  X ⊢ ♯Y;Z
        (1, Backward) => {
            let (y, x) = split_pair(&c.lhs).ok_or_else(|| fail("a pairing on the left"))?;
            Consecution::new(x, pair(neg(y), c.rhs.clone()))
        }
        // 2a fwd: X ⊢ Y;Z  →  X;♯Y ⊢ Z
        (2, Forward) => {
            let (y, z) = split_pair(&c.rhs).ok_or_else(|| fail("a pairing on the right"))?;
            Consecution::new(pair(c.lhs.clone(), neg(y)), z)
        }
        // 2a bwd: X;♯Y ⊢ Z  →  X ⊢ Y;Z
        (2, Backward) => {
            let (x, ny) = split_pair(&c.lhs).ok_or_else(|| fail("a pairing on the left"))?;
            let y = split_neg(&ny)
                .ok_or_else(|| fail("a negated second component on the left"))?;
            Consecution::new(x, pair(y, c.rhs.clone()))
        }
        // 2b fwd: X;♯Y ⊢ Z  →  X ⊢ Z;Y
        (3, Forward) => {
            let (x, ny) = split_pair(&c.lhs).ok_or_else(|| fail("a pairing on the left"))?;
            let y = split_neg(&ny)
                .ok_or_else(|| fail("a negated second component on the left"))?;
            Consecution::new(x, pair(c.rhs.clone(), y))
        }
        // 2b bwd: X ⊢ Z;Y  →  X;♯Y ⊢ Z
        (3, Backward) => {
            let (z, y) = split_pair(&c.rhs).ok_or_else(|| fail("a pairing on the right"))?;
            Consecution::new(pair(c.lhs.clone(), neg(y)), z)
        }
        // 3a fwd: X ⊢ Y  →  ♯Y ⊢ ♯X
        (4, Forward) => Consecution::new(neg(c.rhs.clone()), neg(c.lhs.clone())),
        // 3a bwd: ♯Y ⊢ ♯X  →  X ⊢ Y
        (4, Backward) => {
            let y = split_neg(&c.lhs).ok_or_else(|| fail("a negation on the left"))?;
            let x = split_neg(&c.rhs).ok_or_else(|| fail("a negation on the right"))?;
            Consecution::new(x, y)
        }
        // 3b fwd: ♯Y ⊢ ♯X  →  ♯♯X ⊢ Y
        (5, Forward) => {
            let y = split_neg(&c.lhs).ok_or_else(|| fail("a negation on the left"))?;
            let x = split_neg(&c.rhs).ok_or_else(|| fail("a negation on the right"))?;
            Consecution::new(neg(neg(x)), y)
        }
        // 3b bwd: ♯♯X ⊢ Y  →  ♯Y ⊢ ♯X
        (5, Backward) => {
            let x = split_neg(&c.lhs)
                .and_then(|inner| split_neg(&inner))
                .ok_or_else(|| fail("a double negation on the left"))?;
            Consecution::new(neg(c.rhs.clone()), neg(x))
        }
        _ => unreachable!(),
    };
    Ok(out)
}

/// Replays a postulate trace from `c`.
pub fn replay_trace(c: &Consecution, trace: &[PostulateStep]) -> Result<Consecution, DisplayError> {
    let mut cur = c.clone();
    for step in trace {
        cur = apply_postulate(&cur, *step)?;
    }
    Ok(cur)
}

/// The display theorem as an algorithm: rearranges `c` so that the
/// constituent at `p` becomes the entire left-hand side (if it is an
/// antecedent part) or the entire right-hand side (if consequent), returning
/// the rearranged consecution together with a trace that replays from `c`.
pub fn display_at(
    c: &Consecution,
    p: &Path,
) -> Result<(Consecution, Vec<PostulateStep>), DisplayError> {
    use Direction::{Backward as B, Forward as F};
    use PostulateName::*;
    c.at(p)?;
    let mut cur = c.clone();
    let mut side = p.side;
    let mut trace: Vec<PostulateStep> = Vec::new();
    for step in &p.steps {
        let top = match side {
            Side::Lhs => &cur.lhs,
            Side::Rhs => &cur.rhs,
        };
        // Each case peels the single constructor above the target, moving the
        // rest of the context to the other side of the consecution.
        let (seq, next_side): (&[(PostulateName, Direction)], Side) = match (side, top, step) {
            (Side::Lhs, Structure::Semi(_, _), PathStep::Left) => (&[(AD1a, F)], Side::Lhs),
            (Side::Lhs, Structure::Semi(_, _), PathStep::Right) => {
                (&[(AD1a, F), (AD1b, F), (AD1a, F)], Side::Lhs)
            }
            (Side::Lhs, Structure::Comma(_, _), PathStep::Left) => (&[(MD1a, F)], Side::Lhs),
            (Side::Lhs, Structure::Comma(_, _), PathStep::Right) => {
                (&[(MD1a, F), (MD1b, F), (MD1a, F)], Side::Lhs)
            }
            (Side::Lhs, Structure::Sharp(_), PathStep::IntoSharp) => {
                (&[(AD3a, F), (AD3a, F), (AD3b, B), (AD3a, B), (AD3a, B)], Side::Rhs)
            }
            (Side::Lhs, Structure::Flat(_), PathStep::IntoFlat) => {
                (&[(MD3a, F), (MD3a, F), (MD3b, B), (MD3a, B), (MD3a, B)], Side::Rhs)
            }
            (Side::Rhs, Structure::Semi(_, _), PathStep::Left) => {
                (&[(AD2a, F), (AD2b, F), (AD2a, F)], Side::Rhs)
            }
            (Side::Rhs, Structure::Semi(_, _), PathStep::Right) => (&[(AD2a, F)], Side::Rhs),
            (Side::Rhs, Structure::Comma(_, _), PathStep::Left) => {
                (&[(MD2a, F), (MD2b, F), (MD2a, F)], Side::Rhs)
            }
            (Side::Rhs, Structure::Comma(_, _), PathStep::Right) => (&[(MD2a, F)], Side::Rhs),
            (Side::Rhs, Structure::Sharp(_), PathStep::IntoSharp) => {
                (&[(AD3a, F), (AD3b, B), (AD3a, B)], Side::Lhs)
            }
            (Side::Rhs, Structure::Flat(_), PathStep::IntoFlat) => {
                (&[(MD3a, F), (MD3b, B), (MD3a, B)], Side::Lhs)
            }
            _ => return Err(DisplayError::DanglingPath),
        };
        for (name, direction) in seq {
            let st = PostulateStep { name: *name, direction: *direction };
            cur = apply_postulate(&cur, st)?;
            trace.push(st);
        }
        side = next_side;
    }
    Ok((cur, trace))
}

/// Searches (bidirectionally, breadth-first) for a postulate trace leading
/// from `from` to `to` in at most `max_steps` steps.
pub fn find_display_trace(
    from: &Consecution,
    to: &Consecution,
    max_steps: usize,
) -> Option<Vec<PostulateStep>> {
    if from == to {
        return Some(Vec::new());
    }
    let all_steps: Vec<PostulateStep> = {
        use PostulateName::*;
        [AD1a, AD1b, AD2a, AD2b, AD3a, AD3b, MD1a, MD1b, MD2a, MD2b, MD3a, MD3b]
            .into_iter()
            .flat_map(|n| [PostulateStep::fwd(n), PostulateStep::bwd(n)])
            .collect()
    };
    // Two frontiers expand alternately; `seen_*` map each reached consecution
    // to the trace from its own endpoint.
    let mut seen_fwd: HashMap<Consecution, Vec<PostulateStep>> = HashMap::new();
    let mut seen_bwd: HashMap<Consecution, Vec<PostulateStep>> = HashMap::new();
    seen_fwd.insert(from.clone(), Vec::new());
    seen_bwd.insert(to.clone(), Vec::new());
    let mut frontier_fwd: VecDeque<Consecution> = VecDeque::from([from.clone()]);
    let mut frontier_bwd: VecDeque<Consecution> = VecDeque::from([to.clone()]);
    let join = |path_fwd: &[PostulateStep], path_bwd: &[PostulateStep]| {
        let mut full = path_fwd.to_vec();
        full.extend(path_bwd.iter().rev().map(|s| s.invert()));
        full
    };
    // Each round advances one frontier by one level, so the combined trace
    // never exceeds `max_steps` postulates.
    for _ in 0..max_steps {
        let expand_fwd = frontier_fwd.len() <= frontier_bwd.len();
        let (frontier, seen, other) = if expand_fwd {
            (&mut frontier_fwd, &mut seen_fwd, &seen_bwd)
        } else {
            (&mut frontier_bwd, &mut seen_bwd, &seen_fwd)
        };
        let mut next = VecDeque::new();
        for cur in frontier.drain(..) {
            let path = seen[&cur].clone();
            for step in &all_steps {
                if let Ok(c2) = apply_postulate(&cur, *step) {
                    if seen.contains_key(&c2) {
                        continue;
                    }
                    let mut p2 = path.clone();
                    p2.push(*step);
                    if let Some(pb) = other.get(&c2) {
                        return Some(if expand_fwd { join(&p2, pb) } else { join(pb, &p2) });
                    }
                    seen.insert(c2.clone(), p2);
                    next.push_back(c2);
                }
            }
        }
        *frontier = next;
        if frontier_fwd.is_empty() && frontier_bwd.is_empty() {
            break;
        }
    }
    None
}

/// Translates a structure to its antecedent-reading formula `Ψ`.
pub fn ant_formula(x: &Structure) -> Formula {
    match x {
        Structure::Leaf(f) => f.clone(),
        Structure::AEmpty => Formula::Top,
        Structure::Sharp(y) => Formula::Not(Box::new(con_formula(y))),
        Structure::Semi(a, b) => {
            Formula::And(Box::new(ant_formula(a)), Box::new(ant_formula(b)))
        }
        Structure::MEmpty => Formula::MTop,
        Structure::Flat(y) => Formula::MNot(Box::new(con_formula(y))),
        Structure::Comma(a, b) => {
            Formula::Star(Box::new(ant_formula(a)), Box::new(ant_formula(b)))
        }
    }
}

/// Translates a structure to its consequent-reading formula `Υ`.
pub fn con_formula(x: &Structure) -> Formula {
    match x {
        Structure::Leaf(f) => f.clone(),
        Structure::AEmpty => Formula::Bot,
        Structure::Sharp(y) => Formula::Not(Box::new(ant_formula(y))),
        Structure::Semi(a, b) => {
            Formula::Or(Box::new(con_formula(a)), Box::new(con_formula(b)))
        }
        Structure::MEmpty => Formula::MBot,
        Structure::Flat(y) => Formula::MNot(Box::new(ant_formula(y))),
        Structure::Comma(a, b) => {
            Formula::Par(Box::new(con_formula(a)), Box::new(con_formula(b)))
        }
    }
}

/// The consecution read as a formula: `Ψ(lhs) → Υ(rhs)`.
pub fn consecution_formula(c: &Consecution) -> Formula {
    Formula::Imp(Box::new(ant_formula(&c.lhs)), Box::new(con_formula(&c.rhs)))
}

/// Whether `Ψ(lhs) → Υ(rhs)` is true in the given model (all environments,
/// all points). Budget exhaustion propagates from [`ResourceModel::truth`].
pub fn consecution_valid_on(m: &ResourceModel, c: &Consecution) -> TruthOutcome {
    m.truth(&consecution_formula(c))
}

/// The proof rules of DL_CBI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum RuleName {
    Id,
    Cut,
    DisplayEq,
    TopL,
    TopR,
    BotL,
    BotR,
    NotL,
    NotR,
    AndL,
    AndR,
    OrL,
    OrR,
    ImpL,
    ImpR,
    MTopL,
    MTopR,
    MBotL,
    MBotR,
    MNotL,
    MNotR,
    StarL,
    StarR,
    ParL,
    ParR,
    WandL,
    WandR,
    AAL,
    AAR,
    MAL,
    MAR,
    AEL,
    AER,
    MEL,
    MER,
    WkL,
    WkR,
    CtrL,
    CtrR,
}

impl RuleName {
    /// The double-line structural rules may be read in either direction.
    pub fn is_bidirectional(self) -> bool {
        use RuleName::*;
        matches!(self, AAL | AAR | MAL | MAR | AEL | AER | MEL | MER)
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Structure variables usable in rule schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SVar {
    W,
    X,
    Y,
    Z,
}

/// Formula variables usable in rule schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FVar {
    F,
    G,
}

/// A structure pattern in a rule schema. Formula-level patterns (`PTop`
/// through `PWand`) stand for a displayed principal formula whose immediate
/// subformulas are bound to formula variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pat {
    SVar(SVar),
    /// A leaf holding the bound formula variable.
    FVar(FVar),
    /// A leaf holding a propositional variable; two occurrences must agree
    /// (only the `Id` axiom uses this).
    AtomF,
    AE,
    ME,
    Sharp(Box<Pat>),
    Flat(Box<Pat>),
    Semi(Box<Pat>, Box<Pat>),
    Comma(Box<Pat>, Box<Pat>),
    PTop,
    PBot,
    PMTop,
    PMBot,
    PNot(FVar),
    PMNot(FVar),
    PAnd(FVar, FVar),
    POr(FVar, FVar),
    PImp(FVar, FVar),
    PStar(FVar, FVar),
    PPar(FVar, FVar),
    PWand(FVar, FVar),
}

/// A declarative rule schema: premise and conclusion patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub name: RuleName,
    pub premises: Vec<(Pat, Pat)>,
    pub conclusion: (Pat, Pat),
    pub bidirectional: bool,
}

fn sv(v: SVar) -> Pat {
    Pat::SVar(v)
}

fn fvp(v: FVar) -> Pat {
    Pat::FVar(v)
}

fn psharp(p: Pat) -> Pat {
    Pat::Sharp(Box::new(p))
}

fn pflat(p: Pat) -> Pat {
    Pat::Flat(Box::new(p))
}

fn psemi(a: Pat, b: Pat) -> Pat {
    Pat::Semi(Box::new(a), Box::new(b))
}

fn pcomma(a: Pat, b: Pat) -> Pat {
    Pat::Comma(Box::new(a), Box::new(b))
}

/// The built-in schema table: every proof rule except `DisplayEq` (which is
/// checked by replaying its postulate trace rather than by pattern matching).
pub fn rule_schemas() -> Vec<RuleSchema> {
    use FVar::{F, G};
    use RuleName::*;
    use SVar::{W, X, Y, Z};
    let uni = |name, premises, conclusion| RuleSchema {
        name,
        premises,
        conclusion,
        bidirectional: false,
    };
    let bi = |name, premise, conclusion| RuleSchema {
        name,
        premises: vec![premise],
        conclusion,
        bidirectional: true,
    };
    vec![
        uni(Id, vec![], (Pat::AtomF, Pat::AtomF)),
        uni(Cut, vec![(sv(X), fvp(F)), (fvp(F), sv(Y))], (sv(X), sv(Y))),
        uni(TopL, vec![(Pat::AE, sv(X))], (Pat::PTop, sv(X))),
        uni(TopR, vec![], (Pat::AE, Pat::PTop)),
        uni(BotL, vec![], (Pat::PBot, Pat::AE)),
        uni(BotR, vec![(sv(X), Pat::AE)], (sv(X), Pat::PBot)),
        uni(MTopL, vec![(Pat::ME, sv(X))], (Pat::PMTop, sv(X))),
        uni(MTopR, vec![], (Pat::ME, Pat::PMTop)),
        uni(MBotL, vec![], (Pat::PMBot, Pat::ME)),
        uni(MBotR, vec![(sv(X), Pat::ME)], (sv(X), Pat::PMBot)),
        uni(NotL, vec![(psharp(fvp(F)), sv(X))], (Pat::PNot(F), sv(X))),
        uni(NotR, vec![(sv(X), psharp(fvp(F)))], (sv(X), Pat::PNot(F))),
        uni(MNotL, vec![(pflat(fvp(F)), sv(X))], (Pat::PMNot(F), sv(X))),
        uni(MNotR, vec![(sv(X), pflat(fvp(F)))], (sv(X), Pat::PMNot(F))),
        uni(AndL, vec![(psemi(fvp(F), fvp(G)), sv(X))], (Pat::PAnd(F, G), sv(X))),
        uni(
            AndR,
            vec![(sv(X), fvp(F)), (sv(Y), fvp(G))],
            (psemi(sv(X), sv(Y)), Pat::PAnd(F, G)),
        ),
        uni(OrL, vec![(fvp(F), sv(X)), (fvp(G), sv(Y))], (Pat::POr(F, G), psemi(sv(X), sv(Y)))),
        uni(OrR, vec![(sv(X), psemi(fvp(F), fvp(G)))], (sv(X), Pat::POr(F, G))),
        uni(
            ImpL,
            vec![(sv(X), fvp(F)), (fvp(G), sv(Y))],
            (Pat::PImp(F, G), psemi(psharp(sv(X)), sv(Y))),
        ),
        uni(ImpR, vec![(psemi(sv(X), fvp(F)), fvp(G))], (sv(X), Pat::PImp(F, G))),
        uni(StarL, vec![(pcomma(fvp(F), fvp(G)), sv(X))], (Pat::PStar(F, G), sv(X))),
        uni(
            StarR,
            vec![(sv(X), fvp(F)), (sv(Y), fvp(G))],
            (pcomma(sv(X), sv(Y)), Pat::PStar(F, G)),
        ),
        uni(
            ParL,
            vec![(fvp(F), sv(X)), (fvp(G), sv(Y))],
            (Pat::PPar(F, G), pcomma(sv(X), sv(Y))),
        ),
        uni(ParR, vec![(sv(X), pcomma(fvp(F), fvp(G)))], (sv(X), Pat::PPar(F, G))),
        uni(
            WandL,
            vec![(sv(X), fvp(F)), (fvp(G), sv(Y))],
            (Pat::PWand(F, G), pcomma(pflat(sv(X)), sv(Y))),
        ),
        uni(WandR, vec![(pcomma(sv(X), fvp(F)), fvp(G))], (sv(X), Pat::PWand(F, G))),
        bi(
            AAL,
            (psemi(sv(W), psemi(sv(X), sv(Y))), sv(Z)),
            (psemi(psemi(sv(W), sv(X)), sv(Y)), sv(Z)),
        ),
        bi(
            AAR,
            (sv(W), psemi(psemi(sv(X), sv(Y)), sv(Z))),
            (sv(W), psemi(sv(X), psemi(sv(Y), sv(Z)))),
        ),
        bi(
            MAL,
            (pcomma(sv(W), pcomma(sv(X), sv(Y))), sv(Z)),
            (pcomma(pcomma(sv(W), sv(X)), sv(Y)), sv(Z)),
        ),
        bi(
            MAR,
            (sv(W), pcomma(pcomma(sv(X), sv(Y)), sv(Z))),
            (sv(W), pcomma(sv(X), pcomma(sv(Y), sv(Z)))),
        ),
        bi(AEL, (psemi(Pat::AE, sv(X)), sv(Y)), (sv(X), sv(Y))),
        bi(AER, (sv(X), psemi(sv(Y), Pat::AE)), (sv(X), sv(Y))),
        bi(MEL, (pcomma(Pat::ME, sv(X)), sv(Y)), (sv(X), sv(Y))),
        bi(MER, (sv(X), pcomma(sv(Y), Pat::ME)), (sv(X), sv(Y))),
        uni(WkL, vec![(sv(X), sv(Z))], (psemi(sv(X), sv(Y)), sv(Z))),
        uni(WkR, vec![(sv(X), sv(Z))], (sv(X), psemi(sv(Y), sv(Z)))),
        uni(CtrL, vec![(psemi(sv(X), sv(X)), sv(Z))], (sv(X), sv(Z))),
        uni(CtrR, vec![(sv(X), psemi(sv(Z), sv(Z)))], (sv(X), sv(Z))),
    ]
}

#[derive(Default)]
struct Bindings<'a> {
    s: [Option<&'a Structure>; 4],
    f: [Option<&'a Formula>; 2],
    atom: Option<&'a Formula>,
}

impl<'a> Bindings<'a> {
    fn bind_s(&mut self, v: SVar, s: &'a Structure) -> Result<(), String> {
        let slot = &mut self.s[v as usize];
        match slot {
            Some(prev) if *prev != s => {
                Err(format!("structure variable {v:?} bound to both `{prev}` and `{s}`"))
            }
            _ => {
                *slot = Some(s);
                Ok(())
            }
        }
    }

    fn bind_f(&mut self, v: FVar, f: &'a Formula) -> Result<(), String> {
        let slot = &mut self.f[v as usize];
        match slot {
            Some(prev) if *prev != f => {
                Err(format!("formula variable {v:?} bound to both `{prev}` and `{f}`"))
            }
            _ => {
                *slot = Some(f);
                Ok(())
            }
        }
    }
}

fn match_pat<'a>(pat: &Pat, s: &'a Structure, b: &mut Bindings<'a>) -> Result<(), String> {
    use Structure as St;
    let mismatch = |expected: &str| Err(format!("expected {expected}, found `{s}`"));
    let leaf = |s: &'a St| -> Option<&'a Formula> {
        match s {
            St::Leaf(f) => Some(f),
            _ => None,
        }
    };
    match pat {
        Pat::SVar(v) => b.bind_s(*v, s),
        Pat::FVar(v) => match leaf(s) {
            Some(f) => b.bind_f(*v, f),
            None => mismatch("a formula"),
        },
        Pat::AtomF => match leaf(s) {
            Some(f @ Formula::Var(_)) => match b.atom {
                Some(prev) if prev != f => Err(format!(
                    "the two sides of (Id) differ: `{prev}` vs `{f}`"
                )),
                _ => {
                    b.atom = Some(f);
                    Ok(())
                }
            },
            _ => mismatch("a propositional variable"),
        },
        Pat::AE => match s {
            St::AEmpty => Ok(()),
            _ => mismatch("the empty structure AE"),
        },
        Pat::ME => match s {
            St::MEmpty => Ok(()),
            _ => mismatch("the empty structure ME"),
        },
        Pat::Sharp(p) => match s {
            St::Sharp(x) => match_pat(p, x, b),
            _ => mismatch("a #-structure"),
        },
        Pat::Flat(p) => match s {
            St::Flat(x) => match_pat(p, x, b),
            _ => mismatch("a %-structure"),
        },
        Pat::Semi(p, q) => match s {
            St::Semi(x, y) => {
                match_pat(p, x, b)?;
                match_pat(q, y, b)
            }
            _ => mismatch("a ;-structure"),
        },
        Pat::Comma(p, q) => match s {
            St::Comma(x, y) => {
                match_pat(p, x, b)?;
                match_pat(q, y, b)
            }
            _ => mismatch("a ,-structure"),
        },
        Pat::PTop => match leaf(s) {
            Some(Formula::Top) => Ok(()),
            _ => mismatch("the formula top"),
        },
        Pat::PBot => match leaf(s) {
            Some(Formula::Bot) => Ok(()),
            _ => mismatch("the formula bot"),
        },
        Pat::PMTop => match leaf(s) {
            Some(Formula::MTop) => Ok(()),
            _ => mismatch("the formula emp"),
        },
        Pat::PMBot => match leaf(s) {
            Some(Formula::MBot) => Ok(()),
            _ => mismatch("the formula coemp"),
        },
        Pat::PNot(v) => match leaf(s) {
            Some(Formula::Not(g)) => b.bind_f(*v, g),
            _ => mismatch("a !-formula"),
        },
        Pat::PMNot(v) => match leaf(s) {
            Some(Formula::MNot(g)) => b.bind_f(*v, g),
            _ => mismatch("a ~-formula"),
        },
        Pat::PAnd(v, w) => match leaf(s) {
            Some(Formula::And(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("an &-formula"),
        },
        Pat::POr(v, w) => match leaf(s) {
            Some(Formula::Or(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("an |-formula"),
        },
        Pat::PImp(v, w) => match leaf(s) {
            Some(Formula::Imp(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("an ->-formula"),
        },
        Pat::PStar(v, w) => match leaf(s) {
            Some(Formula::Star(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("a *-formula"),
        },
        Pat::PPar(v, w) => match leaf(s) {
            Some(Formula::Par(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("a |*-formula"),
        },
        Pat::PWand(v, w) => match leaf(s) {
            Some(Formula::Wand(g, h)) => {
                b.bind_f(*v, g)?;
                b.bind_f(*w, h)
            }
            _ => mismatch("a -*-formula"),
        },
    }
}

fn match_consecution<'a>(
    pat: &(Pat, Pat),
    c: &'a Consecution,
    b: &mut Bindings<'a>,
    role: &str,
) -> Result<(), String> {
    match_pat(&pat.0, &c.lhs, b).map_err(|e| format!("{role}, left-hand side: {e}"))?;
    match_pat(&pat.1, &c.rhs, b).map_err(|e| format!("{role}, right-hand side: {e}"))
}

/// Auxiliary data for rule-instance checking: the orientation of
/// bidirectional rules (absent means forward) and the postulate trace of a
/// `DisplayEq` node.
#[derive(Debug, Clone, Default)]
pub struct RuleAux<'a> {
    pub direction: Option<Direction>,
    pub trace: &'a [PostulateStep],
}

/// Checks that `conclusion` follows from `premises` by `rule`, i.e. that the
/// triple arises from the rule schema by assigning structures to structure
/// variables and formulas to formula variables.
pub fn check_rule_instance(
    rule: RuleName,
    conclusion: &Consecution,
    premises: &[Consecution],
    aux: &RuleAux,
) -> Result<(), DisplayError> {
    let fail = |detail: String| DisplayError::Rule { rule, detail };
    if rule == RuleName::DisplayEq {
        if premises.len() != 1 {
            return Err(fail(format!("expected 1 premise, found {}", premises.len())));
        }
        let reached = replay_trace(conclusion, aux.trace)
            .map_err(|e| fail(format!("trace does not replay: {e}")))?;
        if reached != premises[0] {
            return Err(fail(format!(
                "trace replay reaches `{reached}`, not the premise `{}`",
                premises[0]
            )));
        }
        return Ok(());
    }
    let schema = rule_schemas()
        .into_iter()
        .find(|s| s.name == rule)
        .expect("every rule except DisplayEq has a schema");
    let backward = aux.direction == Some(Direction::Backward);
    if backward && !schema.bidirectional {
        return Err(fail("rule is not bidirectional".into()));
    }
    let (concl_pat, prem_pats): (&(Pat, Pat), Vec<&(Pat, Pat)>) = if backward {
        (&schema.premises[0], vec![&schema.conclusion])
    } else {
        (&schema.conclusion, schema.premises.iter().collect())
    };
    if premises.len() != prem_pats.len() {
        return Err(fail(format!(
            "expected {} premise(s), found {}",
            prem_pats.len(),
            premises.len()
        )));
    }
    let mut b = Bindings::default();
    match_consecution(concl_pat, conclusion, &mut b, "conclusion").map_err(fail)?;
    for (i, (pat, prem)) in prem_pats.iter().zip(premises).enumerate() {
        match_consecution(pat, prem, &mut b, &format!("premise {}", i + 1)).map_err(fail)?;
    }
    Ok(())
}

/// A proof tree. `DisplayEq` nodes carry their postulate trace (replayed from
/// the conclusion towards the premise); bidirectional structural rules carry
/// the direction used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub conclusion: Consecution,
    pub rule: RuleName,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<PostulateStep>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub premises: Vec<Proof>,
}

impl Proof {
    pub fn axiom(rule: RuleName, conclusion: Consecution) -> Proof {
        Proof { conclusion, rule, direction: None, trace: Vec::new(), premises: Vec::new() }
    }

    pub fn node(rule: RuleName, conclusion: Consecution, premises: Vec<Proof>) -> Proof {
        Proof { conclusion, rule, direction: None, trace: Vec::new(), premises }
    }

    pub fn directed(
        rule: RuleName,
        direction: Direction,
        conclusion: Consecution,
        premise: Proof,
    ) -> Proof {
        Proof {
            conclusion,
            rule,
            direction: Some(direction),
            trace: Vec::new(),
            premises: vec![premise],
        }
    }

    pub fn display_eq(conclusion: Consecution, trace: Vec<PostulateStep>, premise: Proof) -> Proof {
        Proof {
            conclusion,
            rule: RuleName::DisplayEq,
            direction: None,
            trace,
            premises: vec![premise],
        }
    }

    /// All nodes of the proof, root first.
    pub fn nodes(&self) -> Vec<&Proof> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let node: &Proof = out[i];
            out.extend(node.premises.iter());
            i += 1;
        }
        out
    }
}

/// A per-node problem found by [`check_proof`]; `path` is the sequence of
/// premise indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeDiagnostic {
    pub path: Vec<usize>,
    pub message: String,
}

/// The verdict of [`check_proof`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofReport {
    /// Every node is a correct rule instance.
    pub ok: bool,
    /// No `Cut` node occurs.
    pub cut_free: bool,
    /// Every formula occurrence anywhere is a subformula of a formula in the
    /// root conclusion. Only established for correct cut-free proofs; `false`
    /// otherwise.
    pub subformula_ok: bool,
    pub diagnostics: Vec<NodeDiagnostic>,
}

/// Checks every node of a proof tree.
pub fn check_proof(p: &Proof) -> ProofReport {
    fn walk(
        node: &Proof,
        path: &mut Vec<usize>,
        diags: &mut Vec<NodeDiagnostic>,
        cut_free: &mut bool,
    ) {
        if node.rule == RuleName::Cut {
            *cut_free = false;
        }
        let premises: Vec<Consecution> =
            node.premises.iter().map(|q| q.conclusion.clone()).collect();
        let aux = RuleAux { direction: node.direction, trace: &node.trace };
        if let Err(e) = check_rule_instance(node.rule, &node.conclusion, &premises, &aux) {
            diags.push(NodeDiagnostic { path: path.clone(), message: e.to_string() });
        }
        for (i, q) in node.premises.iter().enumerate() {
            path.push(i);
            walk(q, path, diags, cut_free);
            path.pop();
        }
    }
    let mut diagnostics = Vec::new();
    let mut cut_free = true;
    walk(p, &mut Vec::new(), &mut diagnostics, &mut cut_free);
    let ok = diagnostics.is_empty();
    let subformula_ok = ok && cut_free && subformula_property(p);
    ProofReport { ok, cut_free, subformula_ok, diagnostics }
}

fn subformula_property(p: &Proof) -> bool {
    let mut allowed: BTreeSet<Formula> = BTreeSet::new();
    for f in p.conclusion.formulas() {
        allowed.extend(f.subformulas());
    }
    p.nodes()
        .iter()
        .flat_map(|n| n.conclusion.formulas())
        .all(|f| allowed.contains(f))
}

/// A cut-free proof of `f ⊢ f`, by structural induction on `f`.
pub fn identity_proof(f: &Formula) -> Proof {
    use Formula as Fm;
    use PostulateName::*;
    use RuleName::*;
    use Structure as St;
    let leaf = St::Leaf(f.clone());
    let c = Consecution::new(leaf.clone(), leaf.clone());
    match f {
        Fm::Var(_) => Proof::axiom(Id, c),
        Fm::Top => Proof::node(
            TopL,
            c,
            vec![Proof::axiom(TopR, Consecution::new(St::AEmpty, St::Leaf(Fm::Top)))],
        ),
        Fm::Bot => Proof::node(
            BotR,
            c,
            vec![Proof::axiom(BotL, Consecution::new(St::Leaf(Fm::Bot), St::AEmpty))],
        ),
        Fm::MTop => Proof::node(
            MTopL,
            c,
            vec![Proof::axiom(MTopR, Consecution::new(St::MEmpty, St::Leaf(Fm::MTop)))],
        ),
        Fm::MBot => Proof::node(
            MBotR,
            c,
            vec![Proof::axiom(MBotL, Consecution::new(St::Leaf(Fm::MBot), St::MEmpty))],
        ),
        Fm::Not(g) => {
            // (G ⊢ G) ≡D (♯G ⊢ ♯G), then introduce ¬ on the left and right.
            let sg = St::sharp(St::Leaf((**g).clone()));
            let deq = Proof::display_eq(
                Consecution::new(sg.clone(), sg.clone()),
                vec![PostulateStep::bwd(AD3a)],
                identity_proof(g),
            );
            let left = Proof::node(NotL, Consecution::new(leaf.clone(), sg), vec![deq]);
            Proof::node(NotR, c, vec![left])
        }
        Fm::MNot(g) => {
            let fg = St::flat(St::Leaf((**g).clone()));
            let deq = Proof::display_eq(
                Consecution::new(fg.clone(), fg.clone()),
                vec![PostulateStep::bwd(MD3a)],
                identity_proof(g),
            );
            let left = Proof::node(MNotL, Consecution::new(leaf.clone(), fg), vec![deq]);
            Proof::node(MNotR, c, vec![left])
        }
        Fm::And(g, h) => {
            let right = Proof::node(
                AndR,
                Consecution::new(
                    St::semi(St::Leaf((**g).clone()), St::Leaf((**h).clone())),
                    leaf.clone(),
                ),
                vec![identity_proof(g), identity_proof(h)],
            );
            Proof::node(AndL, c, vec![right])
        }
        Fm::Star(g, h) => {
            let right = Proof::node(
                StarR,
                Consecution::new(
                    St::comma(St::Leaf((**g).clone()), St::Leaf((**h).clone())),
                    leaf.clone(),
                ),
                vec![identity_proof(g), identity_proof(h)],
            );
            Proof::node(StarL, c, vec![right])
        }
        Fm::Or(g, h) => {
            let left = Proof::node(
                OrL,
                Consecution::new(
                    leaf.clone(),
                    St::semi(St::Leaf((**g).clone()), St::Leaf((**h).clone())),
                ),
                vec![identity_proof(g), identity_proof(h)],
            );
            Proof::node(OrR, c, vec![left])
        }
        Fm::Par(g, h) => {
            let left = Proof::node(
                ParL,
                Consecution::new(
                    leaf.clone(),
                    St::comma(St::Leaf((**g).clone()), St::Leaf((**h).clone())),
                ),
                vec![identity_proof(g), identity_proof(h)],
            );
            Proof::node(ParR, c, vec![left])
        }
        Fm::Imp(g, h) => {
            let lg = St::Leaf((**g).clone());
            let lh = St::Leaf((**h).clone());
            let left = Proof::node(
                ImpL,
                Consecution::new(leaf.clone(), St::semi(St::sharp(lg.clone()), lh.clone())),
                vec![identity_proof(g), identity_proof(h)],
            );
            let deq = Proof::display_eq(
                Consecution::new(St::semi(leaf.clone(), lg), lh),
                vec![PostulateStep::fwd(AD1a)],
                left,
            );
            Proof::node(ImpR, c, vec![deq])
        }
        Fm::Wand(g, h) => {
            let lg = St::Leaf((**g).clone());
            let lh = St::Leaf((**h).clone());
            let left = Proof::node(
                WandL,
                Consecution::new(leaf.clone(), St::comma(St::flat(lg.clone()), lh.clone())),
                vec![identity_proof(g), identity_proof(h)],
            );
            let deq = Proof::display_eq(
                Consecution::new(St::comma(leaf.clone(), lg), lh),
                vec![PostulateStep::fwd(MD1a)],
                left,
            );
            Proof::node(WandR, c, vec![deq])
        }
    }
}

/// A violation found by the Belnap-condition audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditViolation {
    pub rule: RuleName,
    pub condition: &'static str,
    pub detail: String,
}

/// The result of the Belnap-condition audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub ok: bool,
    pub violations: Vec<AuditViolation>,
}

/// Statically audits the built-in rule table against the Belnap
/// cut-elimination conditions C1 (preservation of formulas), C3
/// (non-proliferation of parameters), C4 (position-alikeness of parameters)
/// and C5 (display of principal constituents).
///
/// `Cut` is exempt from C1: its cut formula deliberately vanishes from the
/// conclusion, and its eliminability is exactly what condition C8 is about.
pub fn audit_belnap_conditions() -> AuditReport {
    audit_schemas(&rule_schemas())
}

fn pat_svars(p: &Pat, out: &mut Vec<SVar>) {
    match p {
        Pat::SVar(v) => out.push(*v),
        Pat::Sharp(x) | Pat::Flat(x) => pat_svars(x, out),
        Pat::Semi(a, b) | Pat::Comma(a, b) => {
            pat_svars(a, out);
            pat_svars(b, out);
        }
        _ => {}
    }
}

fn pat_fvars(p: &Pat, out: &mut Vec<FVar>) {
    match p {
        Pat::FVar(v) | Pat::PNot(v) | Pat::PMNot(v) => out.push(*v),
        Pat::PAnd(v, w)
        | Pat::POr(v, w)
        | Pat::PImp(v, w)
        | Pat::PStar(v, w)
        | Pat::PPar(v, w)
        | Pat::PWand(v, w) => {
            out.push(*v);
            out.push(*w);
        }
        Pat::Sharp(x) | Pat::Flat(x) => pat_fvars(x, out),
        Pat::Semi(a, b) | Pat::Comma(a, b) => {
            pat_fvars(a, out);
            pat_fvars(b, out);
        }
        _ => {}
    }
}

/// Collects `(variable, part)` for every structure-variable occurrence in a
/// consecution pattern.
fn svar_parts(pat: &(Pat, Pat)) -> Vec<(SVar, Part)> {
    fn walk(p: &Pat, side: Side, flips: usize, out: &mut Vec<(SVar, Part)>) {
        let part = if (side == Side::Lhs) == (flips % 2 == 0) {
            Part::Antecedent
        } else {
            Part::Consequent
        };
        match p {
            Pat::SVar(v) => out.push((*v, part)),
            Pat::Sharp(x) | Pat::Flat(x) => walk(x, side, flips + 1, out),
            Pat::Semi(a, b) | Pat::Comma(a, b) => {
                walk(a, side, flips, out);
                walk(b, side, flips, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(&pat.0, Side::Lhs, 0, &mut out);
    walk(&pat.1, Side::Rhs, 0, &mut out);
    out
}

fn is_formula_pat(p: &Pat) -> bool {
    matches!(
        p,
        Pat::AtomF
            | Pat::PTop
            | Pat::PBot
            | Pat::PMTop
            | Pat::PMBot
            | Pat::PNot(_)
            | Pat::PMNot(_)
            | Pat::PAnd(_, _)
            | Pat::POr(_, _)
            | Pat::PImp(_, _)
            | Pat::PStar(_, _)
            | Pat::PPar(_, _)
            | Pat::PWand(_, _)
    )
}

fn contains_nested_formula_pat(p: &Pat) -> bool {
    match p {
        Pat::Sharp(x) | Pat::Flat(x) => is_formula_pat(x) || contains_nested_formula_pat(x),
        Pat::Semi(a, b) | Pat::Comma(a, b) => {
            is_formula_pat(a)
                || is_formula_pat(b)
                || contains_nested_formula_pat(a)
                || contains_nested_formula_pat(b)
        }
        _ => false,
    }
}

/// Audits an arbitrary schema table (used with deliberately corrupted rules
/// as mutation controls for the audit itself).
pub fn audit_schemas(schemas: &[RuleSchema]) -> AuditReport {
    let mut violations = Vec::new();
    for schema in schemas {
        // Bidirectional rules are usable in both orientations; audit both.
        let mut orientations = vec![(schema.premises.clone(), schema.conclusion.clone())];
        if schema.bidirectional {
            orientations.push((vec![schema.conclusion.clone()], schema.premises[0].clone()));
        }
        for (premises, conclusion) in orientations {
            // C1: no variable occurring in a premise is lost in the
            // conclusion (Cut's cut formula is C8's concern).
            if schema.name != RuleName::Cut {
                let mut concl_s = Vec::new();
                let mut concl_f = Vec::new();
                pat_svars(&conclusion.0, &mut concl_s);
                pat_svars(&conclusion.1, &mut concl_s);
                pat_fvars(&conclusion.0, &mut concl_f);
                pat_fvars(&conclusion.1, &mut concl_f);
                for (l, r) in &premises {
                    let mut prem_s = Vec::new();
                    let mut prem_f = Vec::new();
                    pat_svars(l, &mut prem_s);
                    pat_svars(r, &mut prem_s);
                    pat_fvars(l, &mut prem_f);
                    pat_fvars(r, &mut prem_f);
                    for v in prem_s {
                        if !concl_s.contains(&v) {
                            violations.push(AuditViolation {
                                rule: schema.name,
                                condition: "C1",
                                detail: format!(
                                    "structure variable {v:?} occurs in a premise but not in the conclusion"
                                ),
                            });
                        }
                    }
                    for v in prem_f {
                        if !concl_f.contains(&v) {
                            violations.push(AuditViolation {
                                rule: schema.name,
                                condition: "C1",
                                detail: format!(
                                    "formula variable {v:?} occurs in a premise but not in the conclusion"
                                ),
                            });
                        }
                    }
                }
            }
            // C3: each structure variable occurs exactly once in the
            // conclusion.
            let mut concl_s = Vec::new();
            pat_svars(&conclusion.0, &mut concl_s);
            pat_svars(&conclusion.1, &mut concl_s);
            for v in [SVar::W, SVar::X, SVar::Y, SVar::Z] {
                let n = concl_s.iter().filter(|u| **u == v).count();
                if n > 1 {
                    violations.push(AuditViolation {
                        rule: schema.name,
                        condition: "C3",
                        detail: format!(
                            "structure variable {v:?} occurs {n} times in the conclusion"
                        ),
                    });
                }
            }
            // C4: congruent occurrences of a structure variable are all
            // antecedent or all consequent parts, across premises and
            // conclusion.
            let mut parts: HashMap<SVar, Part> = HashMap::new();
            let mut flagged: Vec<SVar> = Vec::new();
            let mut all = svar_parts(&conclusion);
            for prem in &premises {
                all.extend(svar_parts(prem));
            }
            for (v, part) in all {
                match parts.get(&v) {
                    Some(prev) if *prev != part && !flagged.contains(&v) => {
                        flagged.push(v);
                        violations.push(AuditViolation {
                            rule: schema.name,
                            condition: "C4",
                            detail: format!(
                                "structure variable {v:?} occurs both as antecedent and as consequent part"
                            ),
                        });
                    }
                    Some(_) => {}
                    None => {
                        parts.insert(v, part);
                    }
                }
            }
            // C5: non-parametric conclusion formulas occupy a whole side.
            if contains_nested_formula_pat(&conclusion.0)
                || contains_nested_formula_pat(&conclusion.1)
            {
                violations.push(AuditViolation {
                    rule: schema.name,
                    condition: "C5",
                    detail: "a principal formula is not displayed in the conclusion".into(),
                });
            }
        }
    }
    AuditReport { ok: violations.is_empty(), violations }
}

// ---------------------------------------------------------------------------
// Text syntax for structures and consecutions
// ---------------------------------------------------------------------------

/// Parses the ASCII structure syntax: `AE`, `ME`, prefix `#` and `%`, infix
/// `;` and `,` (binary, left-associating, parenthesize to override), and CBI
/// formulas as leaves.
pub fn parse_structure(text: &str) -> Result<Structure, DisplayError> {
    let mut p = SParser { src: text.as_bytes(), pos: 0 };
    let s = p.chain()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(DisplayError::Parse(format!(
            "unexpected trailing input at byte {}",
            p.pos
        )));
    }
    Ok(s)
}

/// Parses a consecution literal `"<structure> |- <structure>"`.
pub fn parse_consecution(text: &str) -> Result<Consecution, DisplayError> {
    let split = top_level_turnstile(text)
        .ok_or_else(|| DisplayError::Parse("missing `|-`".into()))?;
    let lhs = parse_structure(&text[..split])?;
    let rhs = parse_structure(&text[split + 2..])?;
    Ok(Consecution::new(lhs, rhs))
}

fn top_level_turnstile(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    for i in 0..bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b'|' if depth == 0 && bytes.get(i + 1) == Some(&b'-') => return Some(i),
            _ => {}
        }
    }
    None
}

struct SParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> SParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn chain(&mut self) -> Result<Structure, DisplayError> {
        let mut acc = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b';') => {
                    self.pos += 1;
                    acc = Structure::semi(acc, self.atom()?);
                }
                Some(b',') => {
                    self.pos += 1;
                    acc = Structure::comma(acc, self.atom()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let end = self.pos + kw.len();
        if self.src.get(self.pos..end) == Some(kw.as_bytes())
            && !self.src.get(end).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn atom(&mut self) -> Result<Structure, DisplayError> {
        self.skip_ws();
        match self.peek() {
            None => Err(DisplayError::Parse("unexpected end of input".into())),
            Some(b'#') => {
                self.pos += 1;
                Ok(Structure::sharp(self.atom()?))
            }
            Some(b'%') => {
                self.pos += 1;
                Ok(Structure::flat(self.atom()?))
            }
            _ if self.keyword("AE") => Ok(Structure::AEmpty),
            _ if self.keyword("ME") => Ok(Structure::MEmpty),
            Some(first) => {
                // Scan the maximal slice up to a top-level structure
                // delimiter and try to read it as a formula; structural
                // grouping parentheses are the fallback.
                let slice = self.formula_slice();
                if let Ok(f) = parse_formula(slice) {
                    self.pos += slice.len();
                    return Ok(Structure::Leaf(f));
                }
                if first == b'(' {
                    self.pos += 1;
                    let inner = self.chain()?;
                    self.skip_ws();
                    if self.peek() != Some(b')') {
                        return Err(DisplayError::Parse(format!(
                            "expected `)` at byte {}",
                            self.pos
                        )));
                    }
                    self.pos += 1;
                    Ok(inner)
                } else {
                    let err = parse_formula(slice).unwrap_err();
                    Err(DisplayError::Parse(format!(
                        "bad formula leaf starting at byte {}: {err}",
                        self.pos
                    )))
                }
            }
        }
    }

    fn formula_slice(&self) -> &'a str {
        let mut depth = 0usize;
        let mut end = self.pos;
        while end < self.src.len() {
            match self.src[end] {
                b'(' => depth += 1,
                b')' => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                b';' | b',' if depth == 0 => break,
                b'|' if depth == 0 && self.src.get(end + 1) == Some(&b'-') => break,
                _ => {}
            }
            end += 1;
        }
        std::str::from_utf8(&self.src[self.pos..end]).expect("input is valid UTF-8").trim_end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::semantics::{
        bitvec, powerset_model, relational_cbi_model, z_mod, ResourceModel,
    };
    use proptest::prelude::*;

    fn pf(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn fixture_models() -> Vec<ResourceModel> {
        vec![
            z_mod(2, 1).unwrap(),
            z_mod(4, 2).unwrap(),
            bitvec(2).unwrap(),
            powerset_model(&["1".to_string(), "2".to_string()]).unwrap(),
            relational_cbi_model(),
        ]
    }

    #[test]
    fn ant_and_con_formula_table() {
        assert_eq!(ant_formula(&Structure::AEmpty), Formula::Top);
        assert_eq!(con_formula(&Structure::AEmpty), Formula::Bot);
        assert_eq!(ant_formula(&Structure::MEmpty), Formula::MTop);
        assert_eq!(con_formula(&Structure::MEmpty), Formula::MBot);
        let s = Structure::comma(Structure::var("P"), Structure::sharp(Structure::var("Q")));
        assert_eq!(ant_formula(&s), pf("P * !Q"));
        let t = Structure::flat(Structure::var("P"));
        assert_eq!(ant_formula(&t), pf("~P"));
        assert_eq!(con_formula(&t), pf("~P"));
    }

    #[test]
    fn consecution_validity_examples() {
        let id = Consecution::new(Structure::var("P"), Structure::var("P"));
        let mtop = Consecution::new(Structure::MEmpty, Structure::leaf(Formula::MTop));
        let empty = Consecution::new(Structure::AEmpty, Structure::AEmpty);
        for m in fixture_models() {
            assert!(consecution_valid_on(&m, &id).is_true(), "{:?}", m.label());
            assert!(consecution_valid_on(&m, &mtop).is_true(), "{:?}", m.label());
        }
        assert!(consecution_valid_on(&z_mod(2, 1).unwrap(), &empty).is_false());
    }

    #[test]
    fn classify_part_examples() {
        // ♭(X , ♯Y) ⊢ Z ; ♭W with propositional leaves.
        let c = Consecution::new(
            Structure::flat(Structure::comma(
                Structure::var("X"),
                Structure::sharp(Structure::var("Y")),
            )),
            Structure::semi(Structure::var("Z"), Structure::flat(Structure::var("W"))),
        );
        let whole = Path::whole(Side::Lhs);
        assert_eq!(classify_part(&c, &whole).unwrap(), Part::Antecedent);
        let y = Path::new(
            Side::Lhs,
            vec![PathStep::IntoFlat, PathStep::Right, PathStep::IntoSharp],
        );
        assert_eq!(classify_part(&c, &y).unwrap(), Part::Antecedent);
        let x_in_sharp_rhs = Consecution::new(
            Structure::var("P"),
            Structure::sharp(Structure::var("X")),
        );
        let p = Path::new(Side::Rhs, vec![PathStep::IntoSharp]);
        assert_eq!(classify_part(&x_in_sharp_rhs, &p).unwrap(), Part::Antecedent);
        let dangling = Path::new(Side::Lhs, vec![PathStep::Left]);
        assert_eq!(classify_part(&x_in_sharp_rhs, &dangling), Err(DisplayError::DanglingPath));
    }

    #[test]
    fn apply_postulate_examples() {
        use PostulateName::*;
        let x = Structure::var("X");
        let y = Structure::var("Y");
        let z = Structure::var("Z");
        // (X,Y ⊢ Z) --MD1a--> (X ⊢ ♭Y,Z)
        let c = Consecution::new(Structure::comma(x.clone(), y.clone()), z.clone());
        let got = apply_postulate(&c, PostulateStep::fwd(MD1a)).unwrap();
        assert_eq!(
            got,
            Consecution::new(
                x.clone(),
                Structure::comma(Structure::flat(y.clone()), z.clone())
            )
        );
        // (X ⊢ Y) --AD3a--> (♯Y ⊢ ♯X)
        let c = Consecution::new(x.clone(), y.clone());
        let got = apply_postulate(&c, PostulateStep::fwd(AD3a)).unwrap();
        assert_eq!(
            got,
            Consecution::new(Structure::sharp(y.clone()), Structure::sharp(x.clone()))
        );
        // MD1a does not apply to a semicolon.
        let c = Consecution::new(Structure::semi(x, y), z);
        assert!(matches!(
            apply_postulate(&c, PostulateStep::fwd(MD1a)),
            Err(DisplayError::ShapeMismatch { name: MD1a, .. })
        ));
    }

    #[test]
    fn display_worked_example() {
        // Display Y in ♭(X , ♯Y) ⊢ Z ; ♭W.
        let c = Consecution::new(
            Structure::flat(Structure::comma(
                Structure::var("X"),
                Structure::sharp(Structure::var("Y")),
            )),
            Structure::semi(Structure::var("Z"), Structure::flat(Structure::var("W"))),
        );
        let p = Path::new(
            Side::Lhs,
            vec![PathStep::IntoFlat, PathStep::Right, PathStep::IntoSharp],
        );
        let (displayed, trace) = display_at(&c, &p).unwrap();
        let want = Consecution::new(
            Structure::var("Y"),
            Structure::sharp(Structure::comma(
                Structure::flat(Structure::semi(
                    Structure::var("Z"),
                    Structure::flat(Structure::var("W")),
                )),
                Structure::flat(Structure::var("X")),
            )),
        );
        assert_eq!(displayed, want);
        assert_eq!(replay_trace(&c, &trace).unwrap(), displayed);
    }

    #[test]
    fn display_identity_and_single_step() {
        let c = Consecution::new(
            Structure::comma(Structure::var("X"), Structure::var("Y")),
            Structure::var("Z"),
        );
        let (same, trace) = display_at(&c, &Path::whole(Side::Lhs)).unwrap();
        assert_eq!(same, c);
        assert!(trace.is_empty());
        let (displayed, trace) =
            display_at(&c, &Path::new(Side::Lhs, vec![PathStep::Left])).unwrap();
        assert_eq!(
            displayed,
            Consecution::new(
                Structure::var("X"),
                Structure::comma(Structure::flat(Structure::var("Y")), Structure::var("Z"))
            )
        );
        assert_eq!(trace, vec![PostulateStep::fwd(PostulateName::MD1a)]);
    }

    #[test]
    fn check_rule_instance_examples() {
        // (∗R): X,Y ⊢ F∗G from X ⊢ F and Y ⊢ G.
        let concl = Consecution::new(
            Structure::comma(Structure::var("X"), Structure::var("Y")),
            Structure::leaf(pf("P * Q")),
        );
        let prems = vec![
            Consecution::new(Structure::var("X"), Structure::leaf(pf("P"))),
            Consecution::new(Structure::var("Y"), Structure::leaf(pf("Q"))),
        ];
        assert!(check_rule_instance(RuleName::StarR, &concl, &prems, &RuleAux::default()).is_ok());
        // (Id) demands a propositional variable.
        let bad = Consecution::new(Structure::leaf(pf("P & Q")), Structure::leaf(pf("P & Q")));
        assert!(check_rule_instance(RuleName::Id, &bad, &[], &RuleAux::default()).is_err());
        // DisplayEq with a trace that does not reach the premise.
        let c = Consecution::new(Structure::var("P"), Structure::var("Q"));
        let wrong = Consecution::new(Structure::var("Q"), Structure::var("P"));
        let aux = RuleAux {
            direction: None,
            trace: &[PostulateStep::fwd(PostulateName::AD3a)],
        };
        assert!(check_rule_instance(RuleName::DisplayEq, &c, &[wrong], &aux).is_err());
    }

    #[test]
    fn identity_proofs_for_all_connectives() {
        for text in [
            "P", "top", "bot", "emp", "coemp", "!P", "~P", "P & Q", "P | Q", "P -> Q", "P * Q",
            "P |* Q", "P -* Q", "(P -* Q) & ~(P |* !Q)",
        ] {
            let f = pf(text);
            let proof = identity_proof(&f);
            let report = check_proof(&proof);
            assert!(report.ok, "{text}: {:?}", report.diagnostics);
            assert!(report.cut_free, "{text}");
            assert!(report.subformula_ok, "{text}");
        }
    }

    #[test]
    fn broken_display_eq_is_diagnosed() {
        let f = pf("!P");
        let mut proof = identity_proof(&f);
        // Corrupt the trace of the inner DisplayEq node.
        fn strip_first_trace(p: &mut Proof) -> bool {
            if p.rule == RuleName::DisplayEq && !p.trace.is_empty() {
                p.trace.clear();
                return true;
            }
            p.premises.iter_mut().any(strip_first_trace)
        }
        assert!(strip_first_trace(&mut proof));
        let report = check_proof(&proof);
        assert!(!report.ok);
        assert!(report
            .diagnostics
            .iter()
            .any(|d| d.message.contains("DisplayEq")));
    }

    #[test]
    fn audit_passes_and_mutations_are_flagged() {
        let report = audit_belnap_conditions();
        assert!(report.ok, "{:?}", report.violations);
        // Mutation 1: X duplicated in the conclusion (C3, and C1 fails for Z).
        let dup = RuleSchema {
            name: RuleName::WkL,
            premises: vec![(sv(SVar::X), sv(SVar::Z))],
            conclusion: (psemi(sv(SVar::X), sv(SVar::X)), sv(SVar::Z)),
            bidirectional: false,
        };
        let r = audit_schemas(&[dup]);
        assert!(r.violations.iter().any(|v| v.condition == "C3"));
        // Mutation 2: X on both sides (C4).
        let twist = RuleSchema {
            name: RuleName::WkR,
            premises: vec![(sv(SVar::X), sv(SVar::X))],
            conclusion: (sv(SVar::X), psemi(sv(SVar::Y), sv(SVar::X))),
            bidirectional: false,
        };
        let r = audit_schemas(&[twist]);
        assert!(r.violations.iter().any(|v| v.condition == "C4"));
    }

    #[test]
    fn structure_json_round_trip() {
        let s = Structure::semi(
            Structure::flat(Structure::comma(Structure::var("P"), Structure::MEmpty)),
            Structure::sharp(Structure::AEmpty),
        );
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"semi":[{"flat":{"comma":[{"f":"P"},{"me":null}]}},{"sharp":{"ae":null}}]}"#
        );
        let back: Structure = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn proof_json_round_trip() {
        let proof = identity_proof(&pf("P -* Q"));
        let j = serde_json::to_string_pretty(&proof).unwrap();
        let back: Proof = serde_json::from_str(&j).unwrap();
        assert_eq!(back, proof);
        assert!(check_proof(&back).ok);
    }

    #[test]
    fn structure_text_round_trip_examples() {
        for text in [
            "ME |- emp",
            "AE |- top",
            "P ; Q |- P & Q",
            "%(P , #Q) |- R ; %S",
            "(P ; Q) , R |- #(P & Q)",
            "(P | Q) & R |- P",
        ] {
            let c = parse_consecution(text).unwrap();
            let rendered = c.render();
            assert_eq!(parse_consecution(&rendered).unwrap(), c, "{text}");
        }
        let c = parse_consecution("ME |- emp").unwrap();
        assert_eq!(c, Consecution::new(Structure::MEmpty, Structure::leaf(Formula::MTop)));
        assert!(parse_consecution("P ; |- Q").is_err());
        assert!(parse_consecution("P ; Q").is_err());
    }

    #[test]
    fn find_display_trace_finds_short_paths() {
        let from = Consecution::new(
            Structure::semi(Structure::var("X"), Structure::var("Y")),
            Structure::var("Z"),
        );
        let to = Consecution::new(
            Structure::semi(Structure::var("Y"), Structure::var("X")),
            Structure::var("Z"),
        );
        let trace = find_display_trace(&from, &to, 4).unwrap();
        assert_eq!(replay_trace(&from, &trace).unwrap(), to);
    }

    fn arb_structure() -> impl Strategy<Value = Structure> {
        let leaf = prop_oneof![
            Just(Structure::AEmpty),
            Just(Structure::MEmpty),
            "[PQR]".prop_map(|n| Structure::var(&n)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Structure::sharp),
                inner.clone().prop_map(Structure::flat),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Structure::semi(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Structure::comma(a, b)),
            ]
        })
    }

    fn arb_consecution() -> impl Strategy<Value = Consecution> {
        (arb_structure(), arb_structure()).prop_map(|(l, r)| Consecution::new(l, r))
    }

    proptest! {
        #[test]
        fn postulates_are_involutions(c in arb_consecution()) {
            use PostulateName::*;
            for name in [AD1a, AD1b, AD2a, AD2b, AD3a, AD3b, MD1a, MD1b, MD2a, MD2b, MD3a, MD3b] {
                if let Ok(mid) = apply_postulate(&c, PostulateStep::fwd(name)) {
                    let back = apply_postulate(&mid, PostulateStep::bwd(name)).unwrap();
                    prop_assert_eq!(&back, &c);
                }
                if let Ok(mid) = apply_postulate(&c, PostulateStep::bwd(name)) {
                    let back = apply_postulate(&mid, PostulateStep::fwd(name)).unwrap();
                    prop_assert_eq!(&back, &c);
                }
            }
        }

        #[test]
        fn display_at_is_correct_everywhere(c in arb_consecution()) {
            for p in c.constituent_paths() {
                let target = c.at(&p).unwrap().clone();
                let part = classify_part(&c, &p).unwrap();
                let (displayed, trace) = display_at(&c, &p).unwrap();
                prop_assert_eq!(replay_trace(&c, &trace).unwrap(), displayed.clone());
                match part {
                    Part::Antecedent => prop_assert_eq!(&displayed.lhs, &target),
                    Part::Consequent => prop_assert_eq!(&displayed.rhs, &target),
                }
            }
        }

        #[test]
        fn postulates_preserve_parts(c in arb_consecution()) {
            use PostulateName::*;
            // Leaf formulas occurring exactly once must keep their
            // antecedent/consequent classification across every postulate.
            let occurrences = |c: &Consecution| -> HashMap<Formula, Vec<Part>> {
                let mut map: HashMap<Formula, Vec<Part>> = HashMap::new();
                for p in c.constituent_paths() {
                    if let Structure::Leaf(f) = c.at(&p).unwrap() {
                        map.entry(f.clone()).or_default().push(classify_part(c, &p).unwrap());
                    }
                }
                map
            };
            let before = occurrences(&c);
            for name in [AD1a, AD1b, AD2a, AD2b, AD3a, AD3b, MD1a, MD1b, MD2a, MD2b, MD3a, MD3b] {
                for step in [PostulateStep::fwd(name), PostulateStep::bwd(name)] {
                    if let Ok(c2) = apply_postulate(&c, step) {
                        let after = occurrences(&c2);
                        for (f, parts) in &before {
                            if parts.len() == 1 {
                                if let Some(parts2) = after.get(f) {
                                    if parts2.len() == 1 {
                                        prop_assert_eq!(parts[0], parts2[0]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn structure_text_round_trips(s in arb_structure()) {
            let text = s.render();
            prop_assert_eq!(parse_structure(&text).unwrap(), s);
        }

        #[test]
        fn structure_json_round_trips(s in arb_structure()) {
            let j = serde_json::to_string(&s).unwrap();
            let back: Structure = serde_json::from_str(&j).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
