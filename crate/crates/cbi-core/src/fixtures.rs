//! Hand-encoded proof scripts and the shared model fixtures.
//!
//! The proof scripts are built programmatically, with every `≡D` node's
//! postulate trace found by [`find_display_trace`] and then frozen into the
//! serialized copies under `fixtures/`. They exercise the interesting corners
//! of the calculus: commutation of the two negations, the `—∗`/`⊤`
//! interaction axiom, distribution of `—∗` over `∨` under negation, the
//! `⅋` case of the modal translation round trip, and a principal-cut
//! reduction pair.

use crate::display::{
    find_display_trace, Consecution, Direction, Proof, RuleName, Structure,
};
use crate::formula::parse_formula;
use crate::semantics::{
    action_comm, bitvec, powerset_model, relational_cbi_model, z_mod, ResourceModel,
};

/// The standard suite of small CBI-models used across the test and
/// acceptance suites.
pub fn standard_models() -> Vec<ResourceModel> {
    vec![
        z_mod(1, 0).expect("valid parameters"),
        z_mod(2, 1).expect("valid parameters"),
        z_mod(3, 1).expect("valid parameters"),
        z_mod(4, 2).expect("valid parameters"),
        bitvec(2).expect("valid parameters"),
        powerset_model(&["1".to_string(), "2".to_string()]).expect("valid parameters"),
        action_comm(&["a".to_string()]).expect("valid parameters"),
        relational_cbi_model(),
    ]
}

fn l(text: &str) -> Structure {
    Structure::Leaf(parse_formula(text).expect("fixture formulas parse"))
}

fn cc(lhs: Structure, rhs: Structure) -> Consecution {
    Consecution::new(lhs, rhs)
}

/// Builds a `≡D` node whose trace is found by bidirectional search; the two
/// consecutions are display-equivalent by construction of the scripts.
fn deq(conclusion: Consecution, premise: Proof) -> Proof {
    let trace = find_display_trace(&conclusion, &premise.conclusion, 10)
        .unwrap_or_else(|| {
            panic!(
                "no display trace from `{conclusion}` to `{}`",
                premise.conclusion
            )
        });
    Proof::display_eq(conclusion, trace, premise)
}

/// A cut-free proof of `∼¬P ⊢ ¬∼P`: the multiplicative and additive
/// negations commute.
pub fn mnot_not_commute_proof() -> Proof {
    use RuleName::*;
    use Structure as St;
    let s = St::semi(l("~!P"), l("~P"));
    let fae = St::flat(St::AEmpty);
    let n1 = Proof::axiom(Id, cc(l("P"), l("P")));
    let n2 = deq(cc(St::sharp(l("P")), St::sharp(l("P"))), n1);
    let n3 = Proof::node(NotR, cc(St::sharp(l("P")), l("!P")), vec![n2]);
    let n4 = deq(cc(St::flat(l("!P")), St::flat(St::sharp(l("P")))), n3);
    let n5 = Proof::node(MNotL, cc(l("~!P"), St::flat(St::sharp(l("P")))), vec![n4]);
    let n6 = Proof::node(WkL, cc(s.clone(), St::flat(St::sharp(l("P")))), vec![n5]);
    let tail = St::flat(St::sharp(St::flat(s.clone())));
    let n7 = deq(cc(St::flat(l("P")), tail.clone()), n6);
    let n8 = Proof::node(MNotL, cc(l("~P"), tail.clone()), vec![n7]);
    // Weakening introduces the new structure on the right; a display step
    // then commutes the pair into the script's order.
    let n9a = Proof::node(WkL, cc(St::semi(l("~P"), l("~!P")), tail.clone()), vec![n8]);
    let n9 = deq(cc(s.clone(), tail), n9a);
    let n10 = deq(cc(St::sharp(St::flat(s.clone())), St::flat(s.clone())), n9);
    let n11a = Proof::node(
        WkL,
        cc(
            St::semi(St::sharp(St::flat(s.clone())), fae.clone()),
            St::flat(s.clone()),
        ),
        vec![n10],
    );
    let n11 = deq(
        cc(
            St::semi(fae.clone(), St::sharp(St::flat(s.clone()))),
            St::flat(s.clone()),
        ),
        n11a,
    );
    let n12 = deq(
        cc(fae.clone(), St::semi(St::flat(s.clone()), St::flat(s.clone()))),
        n11,
    );
    let n13 = Proof::node(CtrR, cc(fae, St::flat(s)), vec![n12]);
    let n14 = deq(cc(l("~!P"), St::semi(St::sharp(l("~P")), St::AEmpty)), n13);
    let n15 = Proof::directed(
        AER,
        Direction::Forward,
        cc(l("~!P"), St::sharp(l("~P"))),
        n14,
    );
    Proof::node(NotR, cc(l("~!P"), l("!~P")), vec![n15])
}

/// A proof of `∅ ⊢ Q ∧ (R ∗ P) → (R ∧ ¬(P —∗ ¬Q)) ∗ ⊤`, the `—∗`/`⊤`
/// interaction principle.
pub fn wand_top_axiom_proof() -> Proof {
    use RuleName::*;
    use Structure as St;
    let wt = "(R & !(P -* !Q)) * top";
    let a = St::comma(St::flat(l("P")), St::semi(St::sharp(l("Q")), l(wt)));
    // Left branch: R ; ♯(♭P,(♯Q;(W∗⊤))) ⊢ R ∧ ¬(P —∗ ¬Q).
    let a1 = Proof::axiom(Id, cc(l("Q"), l("Q")));
    let a2 = deq(cc(St::sharp(l("Q")), St::sharp(l("Q"))), a1);
    let a3 = Proof::node(NotL, cc(l("!Q"), St::sharp(l("Q"))), vec![a2]);
    let a4a = Proof::node(WkR, cc(l("!Q"), St::semi(l(wt), St::sharp(l("Q")))), vec![a3]);
    let a4 = deq(cc(l("!Q"), St::semi(St::sharp(l("Q")), l(wt))), a4a);
    let a5 = Proof::node(
        WandL,
        cc(l("P -* !Q"), a.clone()),
        vec![Proof::axiom(Id, cc(l("P"), l("P"))), a4],
    );
    let a6 = deq(cc(St::sharp(a.clone()), St::sharp(l("P -* !Q"))), a5);
    let a7 = Proof::node(NotR, cc(St::sharp(a.clone()), l("!(P -* !Q)")), vec![a6]);
    let a8 = Proof::node(
        AndR,
        cc(St::semi(l("R"), St::sharp(a.clone())), l("R & !(P -* !Q)")),
        vec![Proof::axiom(Id, cc(l("R"), l("R"))), a7],
    );
    // Right branch: P ⊢ ⊤.
    let b1 = Proof::axiom(TopR, cc(St::AEmpty, l("top")));
    let b2 = Proof::node(WkL, cc(St::semi(St::AEmpty, l("P")), l("top")), vec![b1]);
    let b3 = Proof::directed(AEL, Direction::Forward, cc(l("P"), l("top")), b2);
    // Join.
    let rsa = St::semi(l("R"), St::sharp(a.clone()));
    let j1 = Proof::node(StarR, cc(St::comma(rsa.clone(), l("P")), l(wt)), vec![a8, b3]);
    let j2 = Proof::node(
        WkR,
        cc(St::comma(rsa, l("P")), St::semi(St::sharp(l("Q")), l(wt))),
        vec![j1],
    );
    let j3 = deq(cc(l("R"), St::semi(a.clone(), a.clone())), j2);
    let j4 = Proof::node(CtrR, cc(l("R"), a), vec![j3]);
    let j5 = deq(
        cc(St::comma(l("R"), l("P")), St::semi(St::sharp(l("Q")), l(wt))),
        j4,
    );
    let j6 = Proof::node(
        StarL,
        cc(l("R * P"), St::semi(St::sharp(l("Q")), l(wt))),
        vec![j5],
    );
    let j7 = deq(cc(St::semi(l("Q"), l("R * P")), l(wt)), j6);
    let j8 = Proof::node(AndL, cc(l("Q & (R * P)"), l(wt)), vec![j7]);
    let j9 = Proof::directed(
        AEL,
        Direction::Backward,
        cc(St::semi(St::AEmpty, l("Q & (R * P)")), l(wt)),
        j8,
    );
    Proof::node(
        ImpR,
        cc(St::AEmpty, l("Q & (R * P) -> (R & !(P -* !Q)) * top")),
        vec![j9],
    )
}

/// A cut-free proof of one direction of the distribution of `—∗` over `∨`
/// under negation: `∅ ⊢ ¬((P∨Q) —∗ ¬R) → ¬(P —∗ ¬R) ∨ ¬(Q —∗ ¬R)`.
pub fn wand_or_distribution_proof() -> Proof {
    use RuleName::*;
    use Structure as St;
    let fa = "P -* !R";
    let fb = "Q -* !R";
    let w1 = "(P | Q) -* !R";
    let na = "!(P -* !R)";
    let nb = "!(Q -* !R)";
    let s = St::semi(l(fa), l(fb));
    let branch = |v: &str, f: &str, other: &str| -> Proof {
        let z = St::comma(St::flat(l(v)), St::sharp(l("R")));
        let p1 = Proof::axiom(Id, cc(l("R"), l("R")));
        let p2 = deq(cc(St::sharp(l("R")), St::sharp(l("R"))), p1);
        let p3 = Proof::node(NotL, cc(l("!R"), St::sharp(l("R"))), vec![p2]);
        let p4 = Proof::node(
            WandL,
            cc(l(f), z.clone()),
            vec![Proof::axiom(Id, cc(l(v), l(v))), p3],
        );
        // Weakening puts the new structure on the right of the old one; a
        // display step restores the script's fixed order of the pair.
        let p5 = Proof::node(WkL, cc(St::semi(l(f), l(other)), z.clone()), vec![p4]);
        let p5b = deq(cc(s.clone(), z), p5);
        deq(cc(l(v), St::comma(St::sharp(l("R")), St::flat(s.clone()))), p5b)
    };
    let y = St::comma(St::sharp(l("R")), St::flat(s.clone()));
    let j1 = Proof::node(
        OrL,
        cc(l("P | Q"), St::semi(y.clone(), y.clone())),
        vec![branch("P", fa, fb), branch("Q", fb, fa)],
    );
    let j2 = Proof::node(CtrR, cc(l("P | Q"), y), vec![j1]);
    let j3 = deq(cc(St::comma(s.clone(), l("P | Q")), St::sharp(l("R"))), j2);
    let j4 = Proof::node(NotR, cc(St::comma(s.clone(), l("P | Q")), l("!R")), vec![j3]);
    let j5 = Proof::node(WandR, cc(s, l(w1)), vec![j4]);
    let j6 = deq(cc(St::semi(St::sharp(l(w1)), l(fb)), St::sharp(l(fa))), j5);
    let j7 = Proof::node(NotR, cc(St::semi(St::sharp(l(w1)), l(fb)), l(na)), vec![j6]);
    let j8 = deq(
        cc(St::semi(St::sharp(l(w1)), St::sharp(l(na))), St::sharp(l(fb))),
        j7,
    );
    let j9 = Proof::node(
        NotR,
        cc(St::semi(St::sharp(l(w1)), St::sharp(l(na))), l(nb)),
        vec![j8],
    );
    let j10 = deq(cc(St::sharp(l(w1)), St::semi(l(na), l(nb))), j9);
    let j11 = Proof::node(NotL, cc(l("!((P | Q) -* !R)"), St::semi(l(na), l(nb))), vec![j10]);
    let j12 = Proof::node(
        OrR,
        cc(l("!((P | Q) -* !R)"), l("!(P -* !R) | !(Q -* !R)")),
        vec![j11],
    );
    let j13 = Proof::directed(
        AEL,
        Direction::Backward,
        cc(
            St::semi(St::AEmpty, l("!((P | Q) -* !R)")),
            l("!(P -* !R) | !(Q -* !R)"),
        ),
        j12,
    );
    Proof::node(
        ImpR,
        cc(St::AEmpty, l("!((P | Q) -* !R) -> !(P -* !R) | !(Q -* !R)")),
        vec![j13],
    )
}

/// A cut-free proof of `P ⅋ Q ⊢ ¬¬∼(¬¬∼P ∗ ¬¬∼Q)`: the `⅋` case of the
/// modal translation round trip (the right-hand side is the composite
/// translation of `P ⅋ Q`).
pub fn par_translation_proof() -> Proof {
    use RuleName::*;
    use Structure as St;
    let h = "P |* Q";
    let k = "!!~P * !!~Q";
    let m = "~(!!~P * !!~Q)";
    let branch = |v: &str| -> Proof {
        let mv = format!("~{v}");
        let nmv = format!("!~{v}");
        let nnmv = format!("!!~{v}");
        let i1 = Proof::axiom(Id, cc(l(v), l(v)));
        let i2 = deq(cc(St::flat(l(v)), St::flat(l(v))), i1);
        let i3 = Proof::node(MNotL, cc(l(&mv), St::flat(l(v))), vec![i2]);
        let i4 = deq(cc(St::sharp(St::flat(l(v))), St::sharp(l(&mv))), i3);
        let i5 = Proof::node(NotR, cc(St::sharp(St::flat(l(v))), l(&nmv)), vec![i4]);
        let i6 = deq(cc(St::sharp(l(&nmv)), St::flat(l(v))), i5);
        let i7 = Proof::node(NotL, cc(l(&nnmv), St::flat(l(v))), vec![i6]);
        deq(cc(l(v), St::flat(l(&nnmv))), i7)
    };
    let j1 = Proof::node(
        ParL,
        cc(l(h), St::comma(St::flat(l("!!~P")), St::flat(l("!!~Q")))),
        vec![branch("P"), branch("Q")],
    );
    let j2 = deq(cc(St::comma(l("!!~P"), l("!!~Q")), St::flat(l(h))), j1);
    let j3 = Proof::node(StarL, cc(l(k), St::flat(l(h))), vec![j2]);
    let j4 = deq(cc(l(h), St::flat(l(k))), j3);
    let j5 = Proof::node(MNotR, cc(l(h), l(m)), vec![j4]);
    let j6 = deq(cc(St::sharp(l(m)), St::sharp(l(h))), j5);
    let j7 = Proof::node(NotL, cc(l("!~(!!~P * !!~Q)"), St::sharp(l(h))), vec![j6]);
    let j8 = deq(cc(l(h), St::sharp(l("!~(!!~P * !!~Q)"))), j7);
    Proof::node(NotR, cc(l(h), l("!!~(!!~P * !!~Q)")), vec![j8])
}

/// A principal-cut reduction pair for `⅋`: `before` cuts on the compound
/// formula `P ⅋ Q` whose occurrences in both premises are principal; `after`
/// derives the same conclusion cutting only on the subformulas `P` and `Q`.
pub fn par_cut_reduction() -> (Proof, Proof) {
    use RuleName::*;
    use Structure as St;
    let x = l("P |* Q");
    let y = St::comma(l("P"), l("Q"));
    let id_p = || Proof::axiom(Id, cc(l("P"), l("P")));
    let id_q = || Proof::axiom(Id, cc(l("Q"), l("Q")));
    let parl = || Proof::node(ParL, cc(x.clone(), y.clone()), vec![id_p(), id_q()]);
    let parr = Proof::node(ParR, cc(x.clone(), x.clone()), vec![parl()]);
    let before = Proof::node(Cut, cc(x.clone(), y.clone()), vec![parr, parl()]);
    let n2 = deq(cc(St::comma(x.clone(), St::flat(l("Q"))), l("P")), parl());
    let n3 = Proof::node(
        Cut,
        cc(St::comma(x.clone(), St::flat(l("Q"))), l("P")),
        vec![n2, id_p()],
    );
    let n4 = deq(cc(St::comma(x.clone(), St::flat(l("P"))), l("Q")), n3);
    let n5 = Proof::node(
        Cut,
        cc(St::comma(x.clone(), St::flat(l("P"))), l("Q")),
        vec![n4, id_q()],
    );
    let after = deq(cc(x, y), n5);
    (before, after)
}

/// All named proof scripts, for iteration in tests and the CLI.
pub fn all_fixture_proofs() -> Vec<(&'static str, Proof)> {
    let (before, after) = par_cut_reduction();
    vec![
        ("mnot_not_commute", mnot_not_commute_proof()),
        ("wand_top_axiom", wand_top_axiom_proof()),
        ("wand_or_distribution", wand_or_distribution_proof()),
        ("par_translation", par_translation_proof()),
        ("par_cut_before", before),
        ("par_cut_after", after),
    ]
}
