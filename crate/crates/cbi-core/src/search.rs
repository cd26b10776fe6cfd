//! Bounded, cut-free backward proof search.
//!
//! The calculus is undecidable, so the search is honest about its limits: it
//! either returns a checked cut-free proof or reports exhaustion of its
//! budgets — never "disproved".
//!
//! The search works on *display equivalence classes* rather than raw
//! consecutions: display postulate steps are invertible and free, so all
//! consecutions reachable from one another by postulates alone form one
//! search node. Each class is enumerated once by breadth-first closure
//! under single postulate steps (bounded by size, wrapper-stack, and unit
//! sanity filters that discard display debris such as `♯♯` pumping), keyed
//! by its minimal member, and remembered with a postulate trace to every
//! member. Rules then apply at the top level of any member:
//!
//! - single-premise rules are unit-cost edges between classes;
//! - two-premise rules split into independent sub-searches over the
//!   remaining budget;
//! - goals invalid on tiny built-in models are pruned (sound, because
//!   every rule preserves validity), contraction fires at most once per
//!   class and only where duplication can pay off, structural units are
//!   introduced only where they can pay off, and failures are memoized per
//!   class and budget.
//!
//! Expansion is best-first on rule depth plus goal size with deterministic
//! tie-breaks, so results are reproducible. `depth` bounds rule
//! applications per branch; display steps are free and appear in returned
//! proofs as `≡D` nodes of at most `postulate_budget` steps each.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::display::{
    apply_postulate, consecution_valid_on, Consecution, Direction, PostulateName, PostulateStep,
    Proof, RuleName, Structure,
};
use crate::formula::Formula;
use crate::semantics::{z_mod, ResourceModel};

/// Budgets and policy for [`prove`].
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Maximum rule applications per branch (`≥ 1`).
    pub depth: usize,
    /// Maximum postulate steps per `≡D` node in returned proofs.
    pub postulate_budget: usize,
    /// Rules the search may apply backward; rules left out are disabled.
    /// The order is honored as a tie-breaking priority among moves of equal
    /// cost.
    pub rule_order: Vec<RuleName>,
    /// Whether memo keys go through [`canonical_form`].
    pub canonicalize: bool,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            depth: 20,
            postulate_budget: 12,
            rule_order: default_rule_order(),
            canonicalize: true,
        }
    }
}

impl SearchConfig {
    /// The default configuration at a given depth bound.
    pub fn with_depth(depth: usize) -> SearchConfig {
        SearchConfig { depth, ..SearchConfig::default() }
    }
}

/// The default backward rule order: axioms, logical right rules, logical
/// left rules, units, associativity, weakening, contraction last.
pub fn default_rule_order() -> Vec<RuleName> {
    use RuleName::*;
    vec![
        Id, TopR, MTopR, BotL, MBotL, TopL, MTopL, BotR, MBotR, NotR, MNotR, OrR, ParR, ImpR,
        WandR, AndR, StarR, NotL, MNotL, AndL, StarL, OrL, ParL, ImpL, WandL, AEL, AER, MEL, MER,
        AAL, AAR, MAL, MAR, WkL, WkR, CtrL, CtrR,
    ]
}

/// Hard safety valve on expanded classes; hitting it yields honest
/// exhaustion.
const NODE_CAP: u64 = 200_000;

/// Hard safety valve on distinct consecutions stored per sub-search.
const STATE_CAP: usize = 400_000;

/// Members enumerated per display class before truncating.
const CLASS_CAP: usize = 4_096;

/// Goals may exceed the root goal's structure size by this margin before
/// they are cut off.
const SIZE_MARGIN: usize = 12;

/// Maximum `♯`/`♭` nesting allowed in explored goals. Display postulates
/// can pump unbounded stacks (`X ⊢ Y` to `♯♯X ⊢ ♯♯Y` and on); proofs of
/// small goals only ever need shallow ones. Stripping a redundant double
/// wrapper from one side transiently deepens the other by one, so this
/// sits one above the deepest useful goal nesting.
const STACK_CAP: usize = 4;

/// Maximum structural-unit occurrences (`∅`/`⊘`) in explored goals.
const UNIT_CAP: usize = 2;

/// Statistics reported on exhaustion.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SearchStats {
    /// Display classes expanded across the whole search.
    pub nodes: u64,
    /// The deepest rule-application depth reached.
    pub max_depth: usize,
    /// Wall-clock time spent.
    #[serde(with = "duration_millis")]
    pub elapsed: Duration,
}

mod duration_millis {
    use super::Duration;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u128(d.as_millis())
    }
}

/// The outcome of a search: a proof, or exhaustion — never "disproved".
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Proved(Proof),
    Exhausted(SearchStats),
}

impl SearchOutcome {
    /// The found proof, if any.
    pub fn proof(&self) -> Option<&Proof> {
        match self {
            SearchOutcome::Proved(p) => Some(p),
            SearchOutcome::Exhausted(_) => None,
        }
    }
}

/// The canonical representative of a consecution used as a memo key:
/// `♯♯`/`♭♭` stacks collapse and `;`/`,` sibling chains are flattened and
/// sorted under the structure order. Used only for memoization, never
/// emitted in proofs.
pub fn canonical_form(c: &Consecution) -> Consecution {
    Consecution::new(canonical_structure(&c.lhs), canonical_structure(&c.rhs))
}

fn canonical_structure(s: &Structure) -> Structure {
    match s {
        Structure::Leaf(_) | Structure::AEmpty | Structure::MEmpty => s.clone(),
        Structure::Sharp(x) => match canonical_structure(x) {
            Structure::Sharp(y) => *y,
            other => Structure::sharp(other),
        },
        Structure::Flat(x) => match canonical_structure(x) {
            Structure::Flat(y) => *y,
            other => Structure::flat(other),
        },
        Structure::Semi(_, _) | Structure::Comma(_, _) => {
            let semi = matches!(s, Structure::Semi(_, _));
            let mut chain = Vec::new();
            collect_chain(s, semi, &mut chain);
            chain.sort();
            let mut it = chain.into_iter().rev();
            let mut acc = it.next().expect("chain is nonempty");
            for x in it {
                acc = if semi { Structure::semi(x, acc) } else { Structure::comma(x, acc) };
            }
            acc
        }
    }
}

fn collect_chain(s: &Structure, semi: bool, out: &mut Vec<Structure>) {
    match (semi, s) {
        (true, Structure::Semi(a, b)) | (false, Structure::Comma(a, b)) => {
            collect_chain(a, semi, out);
            collect_chain(b, semi, out);
        }
        _ => out.push(canonical_structure(s)),
    }
}

/// Searches for a cut-free proof of `c` within the configured budgets.
pub fn prove(c: &Consecution, cfg: &SearchConfig) -> SearchOutcome {
    let start = Instant::now();
    let mut state = SearchState {
        cfg,
        prune_models: vec![
            z_mod(1, 0).expect("valid parameters"),
            z_mod(2, 1).expect("valid parameters"),
        ],
        validity: HashMap::new(),
        failed: HashMap::new(),
        inconclusive: HashMap::new(),
        proved: HashMap::new(),
        contracted: HashSet::new(),
        nodes: 0,
        max_depth: 0,
        aborted: false,
    };
    match state.solve(c, cfg.depth.max(1)) {
        Some(p) => SearchOutcome::Proved(p),
        None => SearchOutcome::Exhausted(SearchStats {
            nodes: state.nodes,
            max_depth: state.max_depth,
            elapsed: start.elapsed(),
        }),
    }
}

/// Size, wrapper, and unit filters for explored consecutions, fixed per
/// sub-search from its root goal.
#[derive(Clone, Copy)]
struct Filters {
    size_limit: usize,
    piece_limit: usize,
}

impl Filters {
    fn for_root(root: &Consecution) -> Filters {
        Filters {
            size_limit: root.lhs.size() + root.rhs.size() + SIZE_MARGIN,
            // Room for one full contraction of the root's material;
            // decompose/contract chains that accumulate more cannot serve
            // a sensible proof of this root and only flood the queue.
            piece_limit: 2 * root.formulas().len().max(1) + 1,
        }
    }

    fn admits(&self, t: &Consecution) -> bool {
        t.lhs.size() + t.rhs.size() <= self.size_limit
            && t.formulas().len() <= self.piece_limit
            && stack_depth(&t.lhs) <= STACK_CAP
            && stack_depth(&t.rhs) <= STACK_CAP
            && no_doubles(&t.lhs)
            && no_doubles(&t.rhs)
            && units_sane(t)
    }

    /// Whether these filters explore at least everything `other` does, so
    /// a failure under `self` is conclusive for a search under `other`.
    fn covers(&self, other: &Filters) -> bool {
        self.size_limit >= other.size_limit && self.piece_limit >= other.piece_limit
    }
}

/// A display equivalence class: its minimal member, and every enumerated
/// member with the postulate trace from the minimal member to it.
struct ClassInfo {
    min: Consecution,
    /// Sorted by member for deterministic iteration and lookup.
    members: Vec<(Consecution, Vec<PostulateStep>)>,
}

impl ClassInfo {
    fn trace_to(&self, m: &Consecution) -> &[PostulateStep] {
        let i = self
            .members
            .binary_search_by(|(c, _)| c.cmp(m))
            .expect("consecution is a member of this class");
        &self.members[i].1
    }
}

/// How a class in the search graph was reached from its parent class.
struct ParentLink {
    parent_min: Consecution,
    /// The member of the parent class the rule concluded.
    member: Consecution,
    rule: RuleName,
    direction: Option<Direction>,
    /// The rule's premise: the member of this class the search entered at.
    entry: Consecution,
}

struct ClassRec {
    parent: Option<ParentLink>,
}

/// A frontier item: a consecution reached by a rule application, whose
/// display class is only enumerated if the item is actually popped.
struct QItem {
    /// Priority: rule depth plus goal size.
    f: usize,
    g: usize,
    /// Deterministic tie-break; unique per item.
    seq: u64,
    entry: Consecution,
    parent: Option<ParentLink>,
}

impl PartialEq for QItem {
    fn eq(&self, other: &Self) -> bool {
        (self.f, self.g, self.seq) == (other.f, other.g, other.seq)
    }
}

impl Eq for QItem {}

impl PartialOrd for QItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.f, self.g, self.seq).cmp(&(other.f, other.g, other.seq))
    }
}

struct SearchState<'a> {
    cfg: &'a SearchConfig,
    prune_models: Vec<ResourceModel>,
    /// Semantic-pruning verdicts, cached per canonical key (validity is
    /// invariant under canonicalization).
    validity: HashMap<Consecution, bool>,
    /// Class keys that failed, with the budget and filters that failed.
    failed: HashMap<Consecution, (usize, Filters)>,
    /// Class keys whose searches overflowed [`STATE_CAP`], with the
    /// largest budget attempted; inconclusive rather than disproved.
    inconclusive: HashMap<Consecution, usize>,
    /// Proofs of exactly these consecutions, reused across sub-searches.
    proved: HashMap<Consecution, Proof>,
    /// Classes already contracted with a given rule; contraction is the
    /// only context-duplicating move and is kept scarce.
    contracted: HashSet<(RuleName, Consecution)>,
    nodes: u64,
    max_depth: usize,
    /// Set when the global [`NODE_CAP`] is hit; stops the whole search.
    aborted: bool,
}

/// Per-sub-search class bookkeeping.
struct ClassSpace {
    /// Class key (minimal member) to class.
    classes: HashMap<Consecution, Rc<ClassInfo>>,
    /// Any member to its class key.
    member_index: HashMap<Consecution, Consecution>,
    /// Total members stored in this sub-search, capped by [`STATE_CAP`].
    states: usize,
}

impl<'a> SearchState<'a> {
    fn key(&self, c: &Consecution) -> Consecution {
        if self.cfg.canonicalize {
            canonical_form(c)
        } else {
            c.clone()
        }
    }

    fn valid(&mut self, c: &Consecution) -> bool {
        let key = self.key(c);
        if let Some(v) = self.validity.get(&key) {
            return *v;
        }
        let v = self.prune_models.iter().all(|m| !consecution_valid_on(m, c).is_false());
        self.validity.insert(key, v);
        v
    }

    /// Best-first search from `root` over display classes, bounded by
    /// `budget` rule applications per branch.
    fn solve(&mut self, root: &Consecution, budget: usize) -> Option<Proof> {
        if let Some(p) = self.proved.get(root) {
            return Some(p.clone());
        }
        if !self.valid(root) {
            return None;
        }
        let filters = Filters::for_root(root);
        let mut space =
            ClassSpace { classes: HashMap::new(), member_index: HashMap::new(), states: 0 };
        let root_class = self.class_of(root, &filters, &mut space);
        if let Some((b, f)) = self.failed.get(&root_class.min) {
            if *b >= budget && f.covers(&filters) {
                return None;
            }
        }
        if self.inconclusive.get(&root_class.min).is_some_and(|b| *b >= budget) {
            return None;
        }
        let mut recs: HashMap<Consecution, ClassRec> = HashMap::new();
        // Best-first on rule depth plus goal size: cheap small classes are
        // expanded early at any depth, so deep proofs over small goals are
        // found without exhausting every shallower layer first. The
        // insertion sequence number is a deterministic tie-break. Items
        // carry raw consecutions; class closures are only computed for
        // items actually popped.
        let mut queue: BinaryHeap<Reverse<QItem>> = BinaryHeap::new();
        let mut seq: u64 = 0;
        let h0 = root.lhs.size() + root.rhs.size();
        queue.push(Reverse(QItem { f: h0, g: 0, seq, entry: root.clone(), parent: None }));
        // Overflowing this sub-search's state budget makes its failure
        // inconclusive: it must not be memoized as disproved, but the
        // enclosing search may carry on with other moves.
        let mut overflow = false;
        while let Some(Reverse(item)) = queue.pop() {
            if self.aborted {
                break;
            }
            let g = item.g;
            let info = self.class_of(&item.entry, &filters, &mut space);
            let min = info.min.clone();
            if recs.contains_key(&min) {
                continue; // already expanded via an arrival of equal or lower priority
            }
            recs.insert(min.clone(), ClassRec { parent: item.parent });
            self.nodes += 1;
            if self.nodes > NODE_CAP {
                self.aborted = true;
                break;
            }
            if space.states > STATE_CAP {
                overflow = true;
                break;
            }
            self.max_depth = self.max_depth.max(g);
            for (m, _) in &info.members {
                if let Some(rule) = axiom_for(m) {
                    let leaf = Proof::axiom(rule, m.clone());
                    let proof = self.finish(root, &recs, &space, &min, m.clone(), leaf);
                    self.proved.insert(root.clone(), proof.clone());
                    return Some(proof);
                }
            }
            if g >= budget {
                continue;
            }
            // Two-premise rules are resolved on the spot, with the
            // leftover budget handed to independent sub-searches.
            for (m, _) in &info.members {
                for (rule, subs) in two_premise_moves(m, &self.cfg.rule_order) {
                    let mut premises = Vec::with_capacity(subs.len());
                    let mut all = true;
                    for sub in &subs {
                        match self.solve(sub, budget - g - 1) {
                            Some(p) => premises.push(p),
                            None => {
                                all = false;
                                break;
                            }
                        }
                    }
                    if all {
                        let node = Proof::node(rule, m.clone(), premises);
                        let proof = self.finish(root, &recs, &space, &min, m.clone(), node);
                        self.proved.insert(root.clone(), proof.clone());
                        return Some(proof);
                    }
                }
            }
            for rule in self.cfg.rule_order.clone() {
                for (m, _) in &info.members {
                    for (direction, p) in rule_moves(rule, m) {
                        if !filters.admits(&p) {
                            continue;
                        }
                        if direction == Some(Direction::Forward)
                            && matches!(
                                rule,
                                RuleName::AEL | RuleName::AER | RuleName::MEL | RuleName::MER
                            )
                            && !grow_useful(rule, m)
                        {
                            continue;
                        }
                        if matches!(rule, RuleName::CtrL | RuleName::CtrR) {
                            if !ctr_useful(rule, m) {
                                continue;
                            }
                            // At most one contraction per display class.
                            if !self.contracted.insert((rule, min.clone())) {
                                continue;
                            }
                        }
                        if !self.valid(&p) {
                            continue;
                        }
                        // Cheap dedup for targets whose class is already
                        // expanded; unknown targets are classified lazily
                        // if popped.
                        if let Some(known) = space.member_index.get(&p) {
                            if recs.contains_key(known) {
                                continue;
                            }
                        }
                        let ng = g + 1;
                        seq += 1;
                        let h = p.lhs.size() + p.rhs.size();
                        queue.push(Reverse(QItem {
                            f: ng + h,
                            g: ng,
                            seq,
                            entry: p.clone(),
                            parent: Some(ParentLink {
                                parent_min: min.clone(),
                                member: m.clone(),
                                rule,
                                direction,
                                entry: p,
                            }),
                        }));
                    }
                }
            }
        }
        if std::env::var("CBI_SEARCH_DEBUG").is_ok() {
            let largest = space.classes.values().map(|i| i.members.len()).max().unwrap_or(0);
            eprintln!(
                "debug: solve [budget {budget}] {} aborted={} overflow={overflow} classes={} states={} largest_class={}",
                root.render(),
                self.aborted,
                space.classes.len(),
                space.states,
                largest,
            );
        }
        if !self.aborted {
            if overflow {
                // Remember the inconclusive attempt so identical retries
                // at no larger a budget are not repeated.
                let e = self.inconclusive.entry(root_class.min.clone()).or_insert(0);
                *e = (*e).max(budget);
            } else {
                match self.failed.get(&root_class.min) {
                    Some((b, f)) if *b >= budget && f.covers(&filters) => {}
                    _ => {
                        self.failed.insert(root_class.min.clone(), (budget, filters));
                    }
                }
            }
        }
        None
    }

    /// The display class of `entry`: enumerated by breadth-first closure
    /// under single postulate steps within the filters, memoized by its
    /// minimal member.
    fn class_of(&mut self, entry: &Consecution, filters: &Filters, space: &mut ClassSpace) -> Rc<ClassInfo> {
        use PostulateName::*;
        if let Some(min) = space.member_index.get(entry) {
            return space.classes.get(min).expect("indexed class exists").clone();
        }
        let mut traces: HashMap<Consecution, Vec<PostulateStep>> = HashMap::new();
        let mut queue: VecDeque<Consecution> = VecDeque::new();
        traces.insert(entry.clone(), Vec::new());
        queue.push_back(entry.clone());
        while let Some(c) = queue.pop_front() {
            if traces.len() >= CLASS_CAP {
                break;
            }
            for name in [AD1a, AD1b, AD2a, AD2b, AD3a, AD3b, MD1a, MD1b, MD2a, MD2b, MD3a, MD3b] {
                for step in [PostulateStep::fwd(name), PostulateStep::bwd(name)] {
                    if let Ok(t) = apply_postulate(&c, step) {
                        // Redundant double wrappers are stripped on the
                        // spot, so the stored members stay double-free.
                        let (extra, t) = strip_doubles(&t);
                        if !filters.admits(&t) || traces.contains_key(&t) {
                            continue;
                        }
                        let mut tr = traces.get(&c).expect("visited").clone();
                        tr.push(step);
                        tr.extend(extra);
                        traces.insert(t.clone(), tr);
                        queue.push_back(t);
                    }
                }
            }
        }
        let min = traces.keys().min().expect("entry is a member").clone();
        let to_min = traces.get(&min).expect("member").clone();
        let mut members: Vec<(Consecution, Vec<PostulateStep>)> = traces
            .iter()
            .map(|(m, tr)| (m.clone(), connect(&to_min, tr)))
            .collect();
        members.sort_by(|a, b| a.0.cmp(&b.0));
        space.states += members.len();
        let info = Rc::new(ClassInfo { min: min.clone(), members });
        for (m, _) in &info.members {
            space.member_index.insert(m.clone(), min.clone());
        }
        space.classes.insert(min, info.clone());
        info
    }

    /// Builds the proof of `root` from a proof of `member` in the class
    /// `min` by walking the parent links.
    fn finish(
        &self,
        root: &Consecution,
        recs: &HashMap<Consecution, ClassRec>,
        space: &ClassSpace,
        min: &Consecution,
        member: Consecution,
        member_proof: Proof,
    ) -> Proof {
        let mut min = min.clone();
        let mut member = member;
        let mut proof = member_proof;
        loop {
            let info = space.classes.get(&min).expect("class is known");
            let rec = recs.get(&min).expect("class was reached");
            match &rec.parent {
                None => {
                    return self.wrap(info, root, &member, proof);
                }
                Some(link) => {
                    let premise = self.wrap(info, &link.entry, &member, proof);
                    proof = Proof {
                        conclusion: link.member.clone(),
                        rule: link.rule,
                        direction: link.direction,
                        trace: Vec::new(),
                        premises: vec![premise],
                    };
                    member = link.member.clone();
                    min = link.parent_min.clone();
                }
            }
        }
    }

    /// Wraps `proof` (which proves `member`) into `≡D` nodes concluding
    /// `target`, a member of the same class, chunked to the postulate
    /// budget.
    fn wrap(
        &self,
        info: &ClassInfo,
        target: &Consecution,
        member: &Consecution,
        proof: Proof,
    ) -> Proof {
        if target == member {
            return proof;
        }
        let steps = connect(info.trace_to(target), info.trace_to(member));
        let chunk = self.cfg.postulate_budget.max(1);
        // Conclusions of each chunked node, found by replaying from the
        // target.
        let mut marks = vec![target.clone()];
        let mut cur = target.clone();
        for (i, step) in steps.iter().enumerate() {
            cur = apply_postulate(&cur, *step).expect("class traces replay");
            if (i + 1) % chunk == 0 && i + 1 < steps.len() {
                marks.push(cur.clone());
            }
        }
        debug_assert_eq!(&cur, member);
        let mut out = proof;
        for (i, conclusion) in marks.iter().enumerate().rev() {
            let lo = i * chunk;
            let hi = (lo + chunk).min(steps.len());
            out = Proof::display_eq(conclusion.clone(), steps[lo..hi].to_vec(), out);
        }
        out
    }
}

/// The postulate trace between two members, given each one's trace from
/// the class minimum: up the common prefix is dropped, the remainder of
/// `from` is inverted, and the remainder of `to` is appended.
fn connect(from: &[PostulateStep], to: &[PostulateStep]) -> Vec<PostulateStep> {
    let k = from.iter().zip(to.iter()).take_while(|(a, b)| a == b).count();
    let mut steps: Vec<PostulateStep> = from[k..].iter().rev().map(|s| s.invert()).collect();
    steps.extend_from_slice(&to[k..]);
    steps
}

/// Axiom closing `goal` outright, if any.
fn axiom_for(goal: &Consecution) -> Option<RuleName> {
    use Structure as St;
    match (&goal.lhs, &goal.rhs) {
        (St::Leaf(Formula::Var(a)), St::Leaf(Formula::Var(b))) if a == b => Some(RuleName::Id),
        (St::AEmpty, St::Leaf(Formula::Top)) => Some(RuleName::TopR),
        (St::Leaf(Formula::Bot), St::AEmpty) => Some(RuleName::BotL),
        (St::MEmpty, St::Leaf(Formula::MTop)) => Some(RuleName::MTopR),
        (St::Leaf(Formula::MBot), St::MEmpty) => Some(RuleName::MBotL),
        _ => None,
    }
}

/// Whether duplicating a side can pay off: the copies must be tellable
/// apart later, which needs either several formulas on the duplicated side
/// (so the copies can be weakened differently) or a binary connective in
/// the goal (whose rule splits the context between premises).
fn ctr_useful(rule: RuleName, goal: &Consecution) -> bool {
    let side = match rule {
        RuleName::CtrL => &goal.lhs,
        _ => &goal.rhs,
    };
    if side.formulas().len() >= 2 {
        return true;
    }
    goal.formulas().iter().any(|f| {
        f.subformulas().iter().any(|g| {
            matches!(
                g,
                Formula::And(_, _)
                    | Formula::Or(_, _)
                    | Formula::Star(_, _)
                    | Formula::Par(_, _)
                    | Formula::Imp(_, _)
                    | Formula::Wand(_, _)
            )
        })
    })
}

/// Whether introducing a structural unit can pay off: either the goal
/// mentions the matching unit formulas, or the unit pairs with a `♯`/`♭`
/// head so the fresh pairing can fold the other side's head away.
fn grow_useful(rule: RuleName, goal: &Consecution) -> bool {
    let additive = matches!(rule, RuleName::AEL | RuleName::AER);
    let mentions = goal.formulas().iter().any(|f| {
        f.subformulas().iter().any(|g| {
            if additive {
                matches!(g, Formula::Top | Formula::Bot)
            } else {
                matches!(g, Formula::MTop | Formula::MBot)
            }
        })
    });
    if mentions {
        return true;
    }
    let side = match rule {
        RuleName::AEL | RuleName::MEL => &goal.lhs,
        _ => &goal.rhs,
    };
    if additive {
        matches!(side, Structure::Sharp(_))
    } else {
        matches!(side, Structure::Flat(_))
    }
}

/// Structural units are only allowed in shallow positions: a whole side or
/// a direct element of the top-level pairing chain of a side, in either
/// case under at most two `♯`/`♭` wrappers, with at most [`UNIT_CAP`]
/// units overall. The second wrapper appears transiently while exchanging
/// a wrapper-headed neighbor past a unit. Units buried deeper are display
/// debris that only multiplies equivalence classes.
fn units_sane(c: &Consecution) -> bool {
    fn unit_count(s: &Structure) -> usize {
        match s {
            Structure::AEmpty | Structure::MEmpty => 1,
            Structure::Leaf(_) => 0,
            Structure::Sharp(x) | Structure::Flat(x) => unit_count(x),
            Structure::Semi(a, b) | Structure::Comma(a, b) => unit_count(a) + unit_count(b),
        }
    }
    fn element_ok(s: &Structure) -> bool {
        // A chain element: a unit under at most two wrappers, or unit-free.
        let mut t = s;
        let mut wrappers = 0;
        while let Structure::Sharp(x) | Structure::Flat(x) = t {
            t = x;
            wrappers += 1;
        }
        match t {
            Structure::AEmpty | Structure::MEmpty => wrappers <= 2,
            other => unit_count(other) == 0,
        }
    }
    fn chain_ok(s: &Structure, semi: bool) -> bool {
        match (semi, s) {
            (true, Structure::Semi(a, b)) | (false, Structure::Comma(a, b)) => {
                chain_ok(a, semi) && chain_ok(b, semi)
            }
            _ => element_ok(s),
        }
    }
    fn side_ok(s: &Structure) -> bool {
        let mut t = s;
        while let Structure::Sharp(x) | Structure::Flat(x) = t {
            t = x;
        }
        match t {
            Structure::Semi(_, _) => chain_ok(t, true),
            Structure::Comma(_, _) => chain_ok(t, false),
            _ => element_ok(s),
        }
    }
    side_ok(&c.lhs) && side_ok(&c.rhs) && unit_count(&c.lhs) + unit_count(&c.rhs) <= UNIT_CAP
}

/// No `♯♯` or `♭♭` anywhere in the side. Double wrappers are
/// display-redundant and only multiply equivalence classes; the search
/// traverses them inside compound strip edges (see [`strip_doubles`])
/// rather than storing them as class members.
fn no_doubles(side: &Structure) -> bool {
    match side {
        Structure::Sharp(x) => !matches!(**x, Structure::Sharp(_)) && no_doubles(x),
        Structure::Flat(x) => !matches!(**x, Structure::Flat(_)) && no_doubles(x),
        Structure::Semi(a, b) | Structure::Comma(a, b) => no_doubles(a) && no_doubles(b),
        Structure::Leaf(_) | Structure::AEmpty | Structure::MEmpty => true,
    }
}

/// Strips outermost `♯♯`/`♭♭` stacks from both sides of `c` by canned
/// postulate sequences, returning the extra steps and the stripped
/// consecution. The intermediate states of these sequences may exceed the
/// usual filters; they exist only inside replayed traces, never as stored
/// class members.
fn strip_doubles(c: &Consecution) -> (Vec<PostulateStep>, Consecution) {
    use PostulateName::*;
    let f = PostulateStep::fwd;
    let b = PostulateStep::bwd;
    let mut steps = Vec::new();
    let mut cur = c.clone();
    loop {
        let seq: Vec<PostulateStep> = match (&cur.lhs, &cur.rhs) {
            (Structure::Sharp(x), _) if matches!(**x, Structure::Sharp(_)) => {
                vec![b(AD3b), b(AD3a)]
            }
            (Structure::Flat(x), _) if matches!(**x, Structure::Flat(_)) => {
                vec![b(MD3b), b(MD3a)]
            }
            (_, Structure::Sharp(y)) if matches!(**y, Structure::Sharp(_)) => {
                vec![f(AD3a), b(AD3b), b(AD3a), b(AD3a)]
            }
            (_, Structure::Flat(y)) if matches!(**y, Structure::Flat(_)) => {
                vec![f(MD3a), b(MD3b), b(MD3a), b(MD3a)]
            }
            _ => break,
        };
        for s in seq {
            cur = apply_postulate(&cur, s).expect("strip sequences replay");
            steps.push(s);
        }
    }
    (steps, cur)
}

/// The deepest run of consecutive `♯`/`♭` wrappers anywhere in `s`.
fn stack_depth(s: &Structure) -> usize {
    fn walk(s: &Structure, run: usize, deepest: &mut usize) {
        match s {
            Structure::Sharp(x) | Structure::Flat(x) => {
                *deepest = (*deepest).max(run + 1);
                walk(x, run + 1, deepest);
            }
            Structure::Semi(a, b) | Structure::Comma(a, b) => {
                walk(a, 0, deepest);
                walk(b, 0, deepest);
            }
            Structure::Leaf(_) | Structure::AEmpty | Structure::MEmpty => {}
        }
    }
    let mut deepest = 0;
    walk(s, 0, &mut deepest);
    deepest
}

/// Single-premise rule applications available at the top level of `goal`,
/// as (direction, premise) pairs.
fn rule_moves(rule: RuleName, goal: &Consecution) -> Vec<(Option<Direction>, Consecution)> {
    use Formula as Fm;
    use RuleName::*;
    use Structure as St;
    let leaf = |g: &Fm| St::Leaf(g.clone());
    let cc = Consecution::new;
    let l = &goal.lhs;
    let r = &goal.rhs;
    let fwd = Some(Direction::Forward);
    let bwd = Some(Direction::Backward);
    let mut out = Vec::new();
    match (rule, l, r) {
        (NotR, _, St::Leaf(Fm::Not(g))) => out.push((None, cc(l.clone(), St::sharp(leaf(g))))),
        (MNotR, _, St::Leaf(Fm::MNot(g))) => out.push((None, cc(l.clone(), St::flat(leaf(g))))),
        (OrR, _, St::Leaf(Fm::Or(g, h))) => {
            out.push((None, cc(l.clone(), St::semi(leaf(g), leaf(h)))));
        }
        (ParR, _, St::Leaf(Fm::Par(g, h))) => {
            out.push((None, cc(l.clone(), St::comma(leaf(g), leaf(h)))));
        }
        (ImpR, _, St::Leaf(Fm::Imp(g, h))) => {
            out.push((None, cc(St::semi(l.clone(), leaf(g)), leaf(h))));
        }
        (WandR, _, St::Leaf(Fm::Wand(g, h))) => {
            out.push((None, cc(St::comma(l.clone(), leaf(g)), leaf(h))));
        }
        (BotR, _, St::Leaf(Fm::Bot)) => out.push((None, cc(l.clone(), St::AEmpty))),
        (MBotR, _, St::Leaf(Fm::MBot)) => out.push((None, cc(l.clone(), St::MEmpty))),
        (NotL, St::Leaf(Fm::Not(g)), _) => out.push((None, cc(St::sharp(leaf(g)), r.clone()))),
        (MNotL, St::Leaf(Fm::MNot(g)), _) => out.push((None, cc(St::flat(leaf(g)), r.clone()))),
        (AndL, St::Leaf(Fm::And(g, h)), _) => {
            out.push((None, cc(St::semi(leaf(g), leaf(h)), r.clone())));
        }
        (StarL, St::Leaf(Fm::Star(g, h)), _) => {
            out.push((None, cc(St::comma(leaf(g), leaf(h)), r.clone())));
        }
        (TopL, St::Leaf(Fm::Top), _) => out.push((None, cc(St::AEmpty, r.clone()))),
        (MTopL, St::Leaf(Fm::MTop), _) => out.push((None, cc(St::MEmpty, r.clone()))),
        (AEL, _, _) => {
            if let St::Semi(a, x) = l {
                if **a == St::AEmpty {
                    out.push((bwd, cc((**x).clone(), r.clone())));
                }
            }
            out.push((fwd, cc(St::semi(St::AEmpty, l.clone()), r.clone())));
        }
        (AER, _, _) => {
            if let St::Semi(y, a) = r {
                if **a == St::AEmpty {
                    out.push((bwd, cc(l.clone(), (**y).clone())));
                }
            }
            out.push((fwd, cc(l.clone(), St::semi(r.clone(), St::AEmpty))));
        }
        (MEL, _, _) => {
            if let St::Comma(a, x) = l {
                if **a == St::MEmpty {
                    out.push((bwd, cc((**x).clone(), r.clone())));
                }
            }
            out.push((fwd, cc(St::comma(St::MEmpty, l.clone()), r.clone())));
        }
        (MER, _, _) => {
            if let St::Comma(y, a) = r {
                if **a == St::MEmpty {
                    out.push((bwd, cc(l.clone(), (**y).clone())));
                }
            }
            out.push((fwd, cc(l.clone(), St::comma(r.clone(), St::MEmpty))));
        }
        (AAL, St::Semi(ab, z), _) => {
            if let St::Semi(w, x) = &**ab {
                out.push((
                    fwd,
                    cc(St::semi((**w).clone(), St::semi((**x).clone(), (**z).clone())), r.clone()),
                ));
            }
            if let St::Semi(x, y) = &**z {
                out.push((
                    bwd,
                    cc(St::semi(St::semi((**ab).clone(), (**x).clone()), (**y).clone()), r.clone()),
                ));
            }
        }
        (MAL, St::Comma(ab, z), _) => {
            if let St::Comma(w, x) = &**ab {
                out.push((
                    fwd,
                    cc(St::comma((**w).clone(), St::comma((**x).clone(), (**z).clone())), r.clone()),
                ));
            }
            if let St::Comma(x, y) = &**z {
                out.push((
                    bwd,
                    cc(
                        St::comma(St::comma((**ab).clone(), (**x).clone()), (**y).clone()),
                        r.clone(),
                    ),
                ));
            }
        }
        (AAR, _, St::Semi(x2, yz)) => {
            if let St::Semi(y, z) = &**yz {
                out.push((
                    fwd,
                    cc(l.clone(), St::semi(St::semi((**x2).clone(), (**y).clone()), (**z).clone())),
                ));
            }
            if let St::Semi(x, y) = &**x2 {
                out.push((
                    bwd,
                    cc(l.clone(), St::semi((**x).clone(), St::semi((**y).clone(), (**yz).clone()))),
                ));
            }
        }
        (MAR, _, St::Comma(x2, yz)) => {
            if let St::Comma(y, z) = &**yz {
                out.push((
                    fwd,
                    cc(
                        l.clone(),
                        St::comma(St::comma((**x2).clone(), (**y).clone()), (**z).clone()),
                    ),
                ));
            }
            if let St::Comma(x, y) = &**x2 {
                out.push((
                    bwd,
                    cc(
                        l.clone(),
                        St::comma((**x).clone(), St::comma((**y).clone(), (**yz).clone())),
                    ),
                ));
            }
        }
        (WkL, St::Semi(x, _), _) => out.push((None, cc((**x).clone(), r.clone()))),
        (WkR, _, St::Semi(_, z)) => out.push((None, cc(l.clone(), (**z).clone()))),
        (CtrL, _, _) => out.push((None, cc(St::semi(l.clone(), l.clone()), r.clone()))),
        (CtrR, _, _) => out.push((None, cc(l.clone(), St::semi(r.clone(), r.clone())))),
        _ => {}
    }
    out
}

/// Two-premise rule applications available at the top level of `goal`.
fn two_premise_moves(
    goal: &Consecution,
    rule_order: &[RuleName],
) -> Vec<(RuleName, Vec<Consecution>)> {
    use Formula as Fm;
    use RuleName::*;
    use Structure as St;
    let leaf = |g: &Fm| St::Leaf(g.clone());
    let cc = Consecution::new;
    let mut out = Vec::new();
    for rule in rule_order {
        match (*rule, &goal.lhs, &goal.rhs) {
            (AndR, St::Semi(a, b), St::Leaf(Fm::And(g, h))) => {
                out.push((AndR, vec![cc((**a).clone(), leaf(g)), cc((**b).clone(), leaf(h))]));
            }
            (StarR, St::Comma(a, b), St::Leaf(Fm::Star(g, h))) => {
                out.push((StarR, vec![cc((**a).clone(), leaf(g)), cc((**b).clone(), leaf(h))]));
            }
            (OrL, St::Leaf(Fm::Or(g, h)), St::Semi(a, b)) => {
                out.push((OrL, vec![cc(leaf(g), (**a).clone()), cc(leaf(h), (**b).clone())]));
            }
            (ParL, St::Leaf(Fm::Par(g, h)), St::Comma(a, b)) => {
                out.push((ParL, vec![cc(leaf(g), (**a).clone()), cc(leaf(h), (**b).clone())]));
            }
            (ImpL, St::Leaf(Fm::Imp(g, h)), St::Semi(sx, b)) => {
                if let St::Sharp(a) = &**sx {
                    out.push((ImpL, vec![cc((**a).clone(), leaf(g)), cc(leaf(h), (**b).clone())]));
                }
            }
            (WandL, St::Leaf(Fm::Wand(g, h)), St::Comma(fx, b)) => {
                if let St::Flat(a) = &**fx {
                    out.push((WandL, vec![cc((**a).clone(), leaf(g)), cc(leaf(h), (**b).clone())]));
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::display::{check_proof, parse_consecution};
    use crate::fixtures::standard_models;
    use crate::formula::parse_formula;
    use proptest::prelude::*;

    fn pc(text: &str) -> Consecution {
        parse_consecution(text).unwrap()
    }

    #[test]
    fn canonical_form_examples() {
        let c = pc("##P |- Q");
        assert_eq!(canonical_form(&c), pc("P |- Q"));
        assert_eq!(canonical_form(&pc("Q ; P |- R")), canonical_form(&pc("P ; Q |- R")));
        assert_eq!(canonical_form(&pc("%%##P |- P")), pc("P |- P"));
        // Idempotent, and invariant under deeper sibling swaps.
        let c = pc("(R ; Q) ; P |- #(S , ME)");
        let k = canonical_form(&c);
        assert_eq!(canonical_form(&k), k);
        assert_eq!(canonical_form(&pc("P ; (Q ; R) |- #(ME , S)")), k);
    }

    #[test]
    fn proves_identity_immediately() {
        let outcome = prove(&pc("P |- P"), &SearchConfig::default());
        let p = outcome.proof().expect("provable");
        assert_eq!(p.rule, RuleName::Id);
        assert!(p.premises.is_empty());
    }

    #[test]
    fn proves_multiplicative_unit_in_one_node() {
        let outcome = prove(&pc("ME |- emp"), &SearchConfig::default());
        let p = outcome.proof().expect("provable");
        assert_eq!(p.rule, RuleName::MTopR);
        assert!(p.premises.is_empty());
    }

    #[test]
    fn proves_negation_commutation_within_depth_20() {
        let outcome = prove(&pc("~!P |- !~P"), &SearchConfig::with_depth(20));
        let p = outcome.proof().expect("provable within depth 20");
        let report = check_proof(p);
        assert!(report.ok, "{:?}", report.diagnostics);
        assert!(report.cut_free);
        assert!(report.subformula_ok);
    }

    #[test]
    fn exhausts_on_unit_consecutions() {
        for text in ["ME |- ME", "AE |- AE"] {
            match prove(&pc(text), &SearchConfig::with_depth(10)) {
                // Both goals are invalid on the built-in pruning models,
                // so the search gives up before expanding anything.
                SearchOutcome::Exhausted(stats) => {
                    assert_eq!(stats.nodes, 0, "{text}");
                }
                SearchOutcome::Proved(_) => panic!("{text} must not be provable"),
            }
        }
    }

    #[test]
    fn proved_outcomes_check_and_hold_on_models() {
        let goals = [
            "P |- P",
            "P & Q |- Q & P",
            "P * Q |- Q * P",
            "AE |- P -> P",
            "AE |- !(P & !P)",
            "P |* Q |- Q |* P",
            "emp , P |- P",
            "P , P -* Q |- Q",
            "AE |- P | !P",
        ];
        let models = standard_models();
        for text in goals {
            let c = pc(text);
            let outcome = prove(&c, &SearchConfig::default());
            let p = outcome.proof().unwrap_or_else(|| panic!("{text} should be provable"));
            assert_eq!(p.conclusion, c, "{text}");
            let report = check_proof(p);
            assert!(report.ok && report.cut_free && report.subformula_ok, "{text}");
            for m in &models {
                assert!(consecution_valid_on(m, &c).is_true(), "{text} on {:?}", m.label());
            }
        }
    }

    #[test]
    fn depth_monotonicity_on_examples() {
        for text in ["P & Q |- Q & P", "~!P |- !~P", "ME |- emp"] {
            let c = pc(text);
            let base = prove(&c, &SearchConfig::with_depth(20));
            let deeper = prove(&c, &SearchConfig::with_depth(26));
            let p1 = base.proof().expect("provable");
            let p2 = deeper.proof().expect("provable");
            assert_eq!(p1, p2, "{text}");
        }
    }

    fn arb_small_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["P", "Q"]).prop_map(Formula::var),
            Just(Formula::Top),
            Just(Formula::MTop),
        ];
        leaf.prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                inner.clone().prop_map(|f| Formula::MNot(Box::new(f))),
                (inner.clone(), inner.clone())
                    .prop_map(|(f, g)| Formula::And(Box::new(f), Box::new(g))),
                (inner.clone(), inner.clone())
                    .prop_map(|(f, g)| Formula::Star(Box::new(f), Box::new(g))),
                (inner.clone(), inner.clone())
                    .prop_map(|(f, g)| Formula::Or(Box::new(f), Box::new(g))),
                (inner.clone(), inner).prop_map(|(f, g)| Formula::Imp(Box::new(f), Box::new(g))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn identity_goals_are_proved_and_checked(f in arb_small_formula()) {
            let c = Consecution::new(
                Structure::Leaf(f.clone()),
                Structure::Leaf(f.clone()),
            );
            let outcome = prove(&c, &SearchConfig::default());
            let p = outcome.proof().expect("identities are provable");
            let report = check_proof(p);
            prop_assert!(report.ok && report.cut_free && report.subformula_ok);
        }

        #[test]
        fn canonical_form_is_idempotent(text in "[PQ]( ; [PQ]){0,3}") {
            let c = parse_consecution(&format!("{text} |- P")).unwrap();
            let k = canonical_form(&c);
            prop_assert_eq!(canonical_form(&k), k);
        }
    }

    #[test]
    fn search_formula_goals_parse() {
        // Guard: the goal texts above stay in sync with the grammar.
        for text in ["~!P", "!~P", "P |* Q"] {
            parse_formula(text).unwrap();
        }
    }
}
