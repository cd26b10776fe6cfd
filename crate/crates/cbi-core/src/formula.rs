//! Syntax of CBI formulas: the thirteen-constructor tree, a concrete ASCII
//! grammar with unicode aliases, precedence-aware rendering, and structural
//! utilities (variables, subformulas, substitution).
//!
//! Concrete tokens: `top` ⊤, `bot` ⊥, `emp` ⊤*, `coemp` ⊥*, `!` ¬, `~` ∼,
//! `&` ∧, `|` ∨, `->` →, `*` ∗, `|*` ⅋, `-*` —∗. Precedence, tightest first:
//! `{!,~} > * > & > |* > | > {-*, ->}`; all binary connectives are
//! left-associative except `-*` and `->`, which are right-associative, share
//! the lowest level, and may not be mixed without parentheses. `F <-> G` is
//! accepted as sugar for `(F -> G) & (G -> F)` and is never a constructor.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A propositional variable, identified by its name.
///
/// Names are nonempty, start with a letter, and continue with letters,
/// digits, or underscores. Two variables are equal iff their names are.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropVar(pub String);

impl PropVar {
    /// Builds a variable from anything string-like.
    pub fn new(name: impl Into<String>) -> Self {
        PropVar(name.into())
    }

    /// The variable's name.
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PropVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A CBI formula.
///
/// The additive family is `Top`, `Bot`, `Not`, `And`, `Or`, `Imp`; the
/// multiplicative family is `MTop` (⊤*), `MBot` (⊥*), `MNot` (∼), `Star` (∗),
/// `Par` (⅋), `Wand` (—∗). Equality is syntactic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(PropVar),
    Top,
    Bot,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    MTop,
    MBot,
    MNot(Box<Formula>),
    Star(Box<Formula>, Box<Formula>),
    Par(Box<Formula>, Box<Formula>),
    Wand(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Shorthand for a variable formula.
    pub fn var(name: &str) -> Formula {
        Formula::Var(PropVar::new(name))
    }

    /// `Iff` is sugar: `F <-> G` expands to `(F -> G) & (G -> F)`.
    pub fn iff(f: Formula, g: Formula) -> Formula {
        Formula::And(
            Box::new(Formula::Imp(Box::new(f.clone()), Box::new(g.clone()))),
            Box::new(Formula::Imp(Box::new(g), Box::new(f))),
        )
    }

    /// Node count of the syntax tree.
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            Var(_) | Top | Bot | MTop | MBot => 1,
            Not(f) | MNot(f) => 1 + f.size(),
            And(f, g) | Or(f, g) | Imp(f, g) | Star(f, g) | Par(f, g) | Wand(f, g) => {
                1 + f.size() + g.size()
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
        use Formula::*;
        match self {
            Var(p) => {
                out.insert(p.clone());
            }
            Top | Bot | MTop | MBot => {}
            Not(f) | MNot(f) => f.collect_vars(out),
            And(f, g) | Or(f, g) | Imp(f, g) | Star(f, g) | Par(f, g) | Wand(f, g) => {
                f.collect_vars(out);
                g.collect_vars(out);
            }
        }
    }

    /// The subformulas of `self`: the reflexive-transitive closure of the
    /// immediate-subterm relation.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        use Formula::*;
        out.insert(self.clone());
        match self {
            Var(_) | Top | Bot | MTop | MBot => {}
            Not(f) | MNot(f) => f.collect_subformulas(out),
            And(f, g) | Or(f, g) | Imp(f, g) | Star(f, g) | Par(f, g) | Wand(f, g) => {
                f.collect_subformulas(out);
                g.collect_subformulas(out);
            }
        }
    }

    /// `F[g/p]`: replaces every occurrence of the variable `p` by `g`.
    pub fn substitute(&self, p: &PropVar, g: &Formula) -> Formula {
        use Formula::*;
        let sub = |f: &Formula| Box::new(f.substitute(p, g));
        match self {
            Var(q) if q == p => g.clone(),
            Var(_) | Top | Bot | MTop | MBot => self.clone(),
            Not(f) => Not(sub(f)),
            MNot(f) => MNot(sub(f)),
            And(a, b) => And(sub(a), sub(b)),
            Or(a, b) => Or(sub(a), sub(b)),
            Imp(a, b) => Imp(sub(a), sub(b)),
            Star(a, b) => Star(sub(a), sub(b)),
            Par(a, b) => Par(sub(a), sub(b)),
            Wand(a, b) => Wand(sub(a), sub(b)),
        }
    }
}

/// Built-in macro `I = !emp -* bot`, the first nonconservativity witness.
pub fn macro_i() -> Formula {
    parse_formula("!emp -* bot").expect("macro I parses")
}

/// Built-in macro `J = top * (emp & !(P -* !I))`, the second
/// nonconservativity witness (contains the variable `P`).
pub fn macro_j() -> Formula {
    let i = render(&macro_i(), RenderStyle::Ascii);
    parse_formula(&format!("top * (emp & !(P -* !({i})))")).expect("macro J parses")
}

/// Built-in macro `K = !( !coemp -* !emp )`; satisfied at `r` iff `e ∈ r∘∞`.
pub fn macro_k() -> Formula {
    parse_formula("!( !coemp -* !emp )").expect("macro K parses")
}

/// Built-in macro `L = !coemp -* emp`; satisfied at `r` iff `r∘∞ ⊆ {e}`.
pub fn macro_l() -> Formula {
    parse_formula("!coemp -* emp").expect("macro L parses")
}

/// Output style for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Ascii,
    Unicode,
    Latex,
}

/// A parse failure, with the byte offset of the offending token and the set
/// of tokens that would have been acceptable there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: found {found}, expected {}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub found: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Emp,
    Coemp,
    Bang,
    Tilde,
    Amp,
    Pipe,
    ParOp,
    StarOp,
    Arrow,
    WandOp,
    IffOp,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Top => "`top`".into(),
            Tok::Bot => "`bot`".into(),
            Tok::Emp => "`emp`".into(),
            Tok::Coemp => "`coemp`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::ParOp => "`|*`".into(),
            Tok::StarOp => "`*`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::WandOp => "`-*`".into(),
            Tok::IffOp => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, pat: &str) -> bool {
        if self.rest().starts_with(pat) {
            self.pos += pat.len();
            true
        } else {
            false
        }
    }

    /// Tokenizes the whole input, returning tokens with their byte offsets.
    fn tokenize(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let Some(c) = self.rest().chars().next() else {
                return Ok(out);
            };
            // Multi-character operators first (longest match).
            let tok = if self.eat("<->") || self.eat("↔") {
                Tok::IffOp
            } else if self.eat("-*") || self.eat("—∗") {
                Tok::WandOp
            } else if self.eat("->") || self.eat("→") {
                Tok::Arrow
            } else if self.eat("|*") || self.eat("⅋") {
                Tok::ParOp
            } else if self.eat("⊤*") {
                Tok::Emp
            } else if self.eat("⊥*") {
                Tok::Coemp
            } else if self.eat("⊤") {
                Tok::Top
            } else if self.eat("⊥") {
                Tok::Bot
            } else if self.eat("!") || self.eat("¬") {
                Tok::Bang
            } else if self.eat("~") || self.eat("∼") {
                Tok::Tilde
            } else if self.eat("&") || self.eat("∧") {
                Tok::Amp
            } else if self.eat("|") || self.eat("∨") {
                Tok::Pipe
            } else if self.eat("*") || self.eat("∗") {
                Tok::StarOp
            } else if self.eat("(") {
                Tok::LParen
            } else if self.eat(")") {
                Tok::RParen
            } else if c.is_ascii_alphabetic() {
                let word: String = self
                    .rest()
                    .chars()
                    .take_while(|ch| ch.is_ascii_alphanumeric() || *ch == '_')
                    .collect();
                self.pos += word.len();
                match word.as_str() {
                    "top" => Tok::Top,
                    "bot" => Tok::Bot,
                    "emp" => Tok::Emp,
                    "coemp" => Tok::Coemp,
                    _ => Tok::Ident(word),
                }
            } else {
                return Err(ParseError {
                    offset: start,
                    found: format!("`{c}`"),
                    expected: vec!["a formula token".into()],
                });
            };
            out.push((start, tok));
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
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

    fn bump(&mut self) -> Tok {
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

    /// Lowest level: `->` (right-associative) and the `<->` sugar. `-*` sits
    /// one level tighter, so `P -* Q -> R` is `(P -* Q) -> R`.
    fn parse_imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_wand()?;
        match self.peek() {
            Some(Tok::Arrow) => {
                self.bump();
                let rhs = self.parse_imp()?;
                Ok(Formula::Imp(Box::new(lhs), Box::new(rhs)))
            }
            Some(Tok::IffOp) => {
                self.bump();
                let rhs = self.parse_wand()?;
                if matches!(self.peek(), Some(Tok::Arrow | Tok::IffOp)) {
                    return Err(self.err(&["`)`", "end of input"]));
                }
                Ok(Formula::iff(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    /// `-*`, right-associative.
    fn parse_wand(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_or()?;
        if matches!(self.peek(), Some(Tok::WandOp)) {
            self.bump();
            let rhs = self.parse_wand()?;
            Ok(Formula::Wand(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_par()?;
        while matches!(self.peek(), Some(Tok::Pipe)) {
            self.bump();
            let rhs = self.parse_par()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_par(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_and()?;
        while matches!(self.peek(), Some(Tok::ParOp)) {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Formula::Par(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_star()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.bump();
            let rhs = self.parse_star()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_star(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_unary()?;
        while matches!(self.peek(), Some(Tok::StarOp)) {
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Formula::Star(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(Formula::Not(Box::new(self.parse_unary()?)))
            }
            Some(Tok::Tilde) => {
                self.bump();
                Ok(Formula::MNot(Box::new(self.parse_unary()?)))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Top) => {
                self.bump();
                Ok(Formula::Top)
            }
            Some(Tok::Bot) => {
                self.bump();
                Ok(Formula::Bot)
            }
            Some(Tok::Emp) => {
                self.bump();
                Ok(Formula::MTop)
            }
            Some(Tok::Coemp) => {
                self.bump();
                Ok(Formula::MBot)
            }
            Some(Tok::Ident(_)) => {
                let Tok::Ident(name) = self.bump() else {
                    unreachable!()
                };
                Ok(Formula::Var(PropVar::new(name)))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.parse_imp()?;
                if matches!(self.peek(), Some(Tok::RParen)) {
                    self.bump();
                    Ok(inner)
                } else {
                    Err(self.err(&["`)`"]))
                }
            }
            _ => Err(self.err(&[
                "identifier", "`top`", "`bot`", "`emp`", "`coemp`", "`!`", "`~`", "`(`",
            ])),
        }
    }
}

/// Parses a formula from its ASCII (or unicode-alias) rendering.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let f = p.parse_imp()?;
    if p.peek().is_some() {
        return Err(p.err(&["end of input", "a binary connective"]));
    }
    Ok(f)
}

/// Precedence level of a formula's top connective (higher binds tighter);
/// atoms get the maximum.
fn level(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        Var(_) | Top | Bot | MTop | MBot => 7,
        Not(_) | MNot(_) => 6,
        Star(_, _) => 5,
        And(_, _) => 4,
        Par(_, _) => 3,
        Or(_, _) => 2,
        Wand(_, _) => 1,
        Imp(_, _) => 0,
    }
}

fn style_tokens(style: RenderStyle) -> [&'static str; 12] {
    // Order: top, bot, emp, coemp, not, mnot, and, or, imp, star, par, wand.
    match style {
        RenderStyle::Ascii => [
            "top", "bot", "emp", "coemp", "!", "~", "&", "|", "->", "*", "|*", "-*",
        ],
        RenderStyle::Unicode => [
            "⊤", "⊥", "⊤*", "⊥*", "¬", "∼", "∧", "∨", "→", "∗", "⅋", "—∗",
        ],
        RenderStyle::Latex => [
            "\\top",
            "\\bot",
            "\\top^{*}",
            "\\bot^{*}",
            "\\neg",
            "\\mathord{\\sim}",
            "\\wedge",
            "\\vee",
            "\\rightarrow",
            "\\ast",
            "\\bindnasrepma",
            "\\mathrel{\\hbox{---}\\llap{$\\ast$}}",
        ],
    }
}

/// Renders a formula with minimal parentheses. The ASCII style round-trips:
/// `parse_formula(render(f, Ascii)) = f`.
pub fn render(f: &Formula, style: RenderStyle) -> String {
    let mut out = String::new();
    render_into(f, style, &mut out);
    out
}

fn render_into(f: &Formula, style: RenderStyle, out: &mut String) {
    use Formula::*;
    let t = style_tokens(style);
    let spaced_unary = matches!(style, RenderStyle::Latex);
    match f {
        Var(p) => out.push_str(p.name()),
        Top => out.push_str(t[0]),
        Bot => out.push_str(t[1]),
        MTop => out.push_str(t[2]),
        MBot => out.push_str(t[3]),
        Not(g) | MNot(g) => {
            out.push_str(if matches!(f, Not(_)) { t[4] } else { t[5] });
            if spaced_unary {
                out.push(' ');
            }
            render_child(g, style, level(f) > level(g), out);
        }
        And(a, b) | Or(a, b) | Imp(a, b) | Star(a, b) | Par(a, b) | Wand(a, b) => {
            let op = match f {
                And(_, _) => t[6],
                Or(_, _) => t[7],
                Imp(_, _) => t[8],
                Star(_, _) => t[9],
                Par(_, _) => t[10],
                Wand(_, _) => t[11],
                _ => unreachable!(),
            };
            let lv = level(f);
            let right_assoc = matches!(f, Imp(_, _) | Wand(_, _));
            // Every level has one connective, so same-level children only
            // need parentheses on the non-associating side.
            let lparen = level(a) < lv || (level(a) == lv && right_assoc);
            let rparen = level(b) < lv || (level(b) == lv && !right_assoc);
            render_child(a, style, lparen, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            render_child(b, style, rparen, out);
        }
    }
}

fn render_child(f: &Formula, style: RenderStyle, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        render_into(f, style, out);
        out.push(')');
    } else {
        render_into(f, style, out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, RenderStyle::Ascii))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn nullary_tokens() {
        assert_eq!(p("top"), Formula::Top);
        assert_eq!(p("bot"), Formula::Bot);
        assert_eq!(p("emp"), Formula::MTop);
        assert_eq!(p("coemp"), Formula::MBot);
    }

    #[test]
    fn grammar_unfolding() {
        assert_eq!(
            p("~(P * ~Q)"),
            Formula::MNot(Box::new(Formula::Star(
                Box::new(Formula::var("P")),
                Box::new(Formula::MNot(Box::new(Formula::var("Q"))))
            )))
        );
    }

    #[test]
    fn wand_binds_tighter_than_imp() {
        assert_eq!(
            p("P -* Q -> R"),
            Formula::Imp(
                Box::new(Formula::Wand(
                    Box::new(Formula::var("P")),
                    Box::new(Formula::var("Q"))
                )),
                Box::new(Formula::var("R"))
            )
        );
    }

    #[test]
    fn precedence_ladder() {
        // ! > * > & > |* > | > ->
        assert_eq!(p("!P * Q"), p("(!P) * Q"));
        assert_eq!(p("P * Q & R"), p("(P * Q) & R"));
        assert_eq!(p("P & Q |* R"), p("(P & Q) |* R"));
        assert_eq!(p("P |* Q | R"), p("(P |* Q) | R"));
        assert_eq!(p("P | Q -> R"), p("(P | Q) -> R"));
    }

    #[test]
    fn associativity() {
        assert_eq!(p("P & Q & R"), p("(P & Q) & R"));
        assert_eq!(p("P * Q * R"), p("(P * Q) * R"));
        assert_eq!(p("P -> Q -> R"), p("P -> (Q -> R)"));
        assert_eq!(p("P -* Q -* R"), p("P -* (Q -* R)"));
    }

    #[test]
    fn mixing_imp_and_wand_resolves_with_wand_tighter() {
        assert_eq!(p("P -> Q -* R"), p("P -> (Q -* R)"));
        assert_eq!(p("P -* Q -> R -> S"), p("(P -* Q) -> (R -> S)"));
    }

    #[test]
    fn iff_is_sugar() {
        assert_eq!(p("P <-> Q"), p("(P -> Q) & (Q -> P)"));
        assert_eq!(p("~~P <-> P"), Formula::iff(p("~~P"), p("P")));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(p("⊤"), Formula::Top);
        assert_eq!(p("⊤*"), Formula::MTop);
        assert_eq!(p("⊥*"), Formula::MBot);
        assert_eq!(p("¬P ∧ ∼Q"), p("!P & ~Q"));
        assert_eq!(p("P ∗ Q ⅋ R"), p("P * Q |* R"));
        assert_eq!(p("P —∗ Q"), p("P -* Q"));
        assert_eq!(p("P → Q"), p("P -> Q"));
        assert_eq!(p("P ↔ Q"), p("P <-> Q"));
    }

    #[test]
    fn unicode_top_vs_emp_disambiguation() {
        // Adjacent `⊤*` is ⊤*; spaced `⊤ * P` is a ∗-conjunction.
        assert_eq!(p("⊤ ∗ P"), p("top * P"));
        assert_eq!(p("⊤* ∗ P"), p("emp * P"));
    }

    #[test]
    fn parse_errors_carry_offset_and_expectations() {
        let e = parse_formula("P & & Q").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.iter().any(|s| s.contains("identifier")));
        let e = parse_formula("P &").unwrap_err();
        assert_eq!(e.found, "end of input");
        let e = parse_formula("(P").unwrap_err();
        assert_eq!(e.expected, vec!["`)`".to_string()]);
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::Top, RenderStyle::Ascii), "top");
        assert_eq!(
            render(&p("P |* Q"), RenderStyle::Ascii),
            "P |* Q"
        );
        assert_eq!(render(&p("P -* Q"), RenderStyle::Unicode), "P —∗ Q");
        assert_eq!(
            render(&p("P -* Q"), RenderStyle::Latex),
            "P \\mathrel{\\hbox{---}\\llap{$\\ast$}} Q"
        );
    }

    #[test]
    fn render_unicode_tokens() {
        assert_eq!(
            render(&p("!P & ~Q |* emp * coemp"), RenderStyle::Unicode),
            "¬P ∧ ∼Q ⅋ ⊤* ∗ ⊥*"
        );
    }

    #[test]
    fn vars_and_subformulas() {
        assert!(Formula::Top.vars().is_empty());
        assert_eq!(p("P * ~P").vars().len(), 1);
        assert_eq!(p("P -> Q").vars().len(), 2);
        assert_eq!(p("P").subformulas().len(), 1);
        assert_eq!(p("~P").subformulas().len(), 2);
        assert_eq!(p("P -* Q").subformulas().len(), 3);
    }

    #[test]
    fn substitution() {
        let pv = PropVar::new("P");
        assert_eq!(p("P & Q").substitute(&pv, &p("R")), p("R & Q"));
        assert_eq!(p("P").substitute(&pv, &p("P")), p("P"));
        assert_eq!(p("~P").substitute(&pv, &p("Q |* R")), p("~(Q |* R)"));
    }

    #[test]
    fn macros_parse_to_expected_shapes() {
        assert_eq!(macro_i(), p("!emp -* bot"));
        assert_eq!(macro_j(), p("top * (emp & !(P -* !(!emp -* bot)))"));
        assert_eq!(macro_k(), p("!(!coemp -* !emp)"));
        assert_eq!(macro_l(), p("!coemp -* emp"));
    }

    #[test]
    fn size_counts_nodes() {
        assert_eq!(p("P").size(), 1);
        assert_eq!(p("P -* Q").size(), 3);
        assert_eq!(p("~(P * ~Q)").size(), 5);
    }
}
