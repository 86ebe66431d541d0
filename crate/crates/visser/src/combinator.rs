//! Reusable proof builders over the LJ/CK rule names.
//!
//! Every function returns a proof that checks in any calculus containing
//! the rules it mentions (all builtins contain LJ). Preconditions are
//! enforced with assertions; callers construct inputs, the checker is the
//! final authority in tests.

use crate::formula::{big_and_list, FMultiset, Formula, Node, Sequent, Substitution};
use crate::proof::Proof;

fn subst_gpd(ctx: &FMultiset, p: Option<&Formula>, q: Option<&Formula>, d: Option<&FMultiset>) -> Substitution {
    let mut s = Substitution::new().bind_context("G", ctx.clone());
    if let Some(p) = p {
        s = s.bind_named("p", p.clone());
    }
    if let Some(q) = q {
        s = s.bind_named("q", q.clone());
    }
    if let Some(d) = d {
        s = s.bind_context("D", d.clone());
    }
    s
}

/// `(id)`: `ctx, f => f`.
pub fn ax_id(ctx: &FMultiset, f: &Formula) -> Proof {
    Proof::rule_app(
        "id",
        subst_gpd(ctx, Some(f), None, None),
        vec![],
        Sequent::to(ctx.with(f.clone()), f.clone()),
    )
}

/// `(L_bot)`: `ctx, bot => suc`.
pub fn ax_l_bot(ctx: &FMultiset, suc: &FMultiset) -> Proof {
    Proof::rule_app(
        "L_bot",
        subst_gpd(ctx, None, None, Some(suc)),
        vec![],
        Sequent::new(ctx.with(Formula::bot()), suc.clone()),
    )
}

/// `(R_top)`: `ctx => top`.
pub fn ax_r_top(ctx: &FMultiset) -> Proof {
    Proof::rule_app(
        "R_top",
        subst_gpd(ctx, None, None, None),
        vec![],
        Sequent::to(ctx.clone(), Formula::top()),
    )
}

/// `(L_w)` once: adds `f` on the left.
pub fn weaken_left_one(p: Proof, f: &Formula) -> Proof {
    let concl = Sequent::new(p.conclusion.antecedent.with(f.clone()), p.conclusion.succedent.clone());
    let s = subst_gpd(&p.conclusion.antecedent, Some(f), None, Some(&p.conclusion.succedent));
    Proof::rule_app("L_w", s, vec![p], concl)
}

/// Weakens the antecedent up to `target` (which must contain it).
pub fn weaken_antecedent_to(p: Proof, target: &FMultiset) -> Proof {
    debug_assert!(
        p.conclusion.antecedent.subset_of(target),
        "cannot weaken {:?} to {:?}",
        p.conclusion.antecedent,
        target
    );
    let missing = target.minus(&p.conclusion.antecedent);
    let mut out = p;
    for f in missing.iter_flat() {
        out = weaken_left_one(out, f);
    }
    out
}

/// `(R_w)`: from `ctx =>` to `ctx => f`.
pub fn weaken_right(p: Proof, f: &Formula) -> Proof {
    assert!(p.conclusion.succedent.is_empty());
    let ctx = p.conclusion.antecedent.clone();
    let concl = Sequent::to(ctx.clone(), f.clone());
    Proof::rule_app("R_w", subst_gpd(&ctx, Some(f), None, None), vec![p], concl)
}

/// `(L_c)` until the antecedent equals `target` (same support, smaller counts).
pub fn contract_antecedent_to(p: Proof, target: &FMultiset) -> Proof {
    let mut out = p;
    loop {
        let extra = out.conclusion.antecedent.minus(target);
        let Some(f) = extra.iter_flat().next().cloned() else {
            break;
        };
        assert!(target.contains(&f), "contraction would drop {f} entirely");
        let ctx = out.conclusion.antecedent.without(&f).without(&f);
        let concl = Sequent::new(ctx.with(f.clone()), out.conclusion.succedent.clone());
        let s = subst_gpd(&ctx, Some(&f), None, Some(&out.conclusion.succedent));
        out = Proof::rule_app("L_c", s, vec![out], concl);
    }
    assert_eq!(&out.conclusion.antecedent, target);
    out
}

/// `(cut)`: from `ctx => a` and `ctx, a => suc` to `ctx => suc`.
pub fn cut(left: Proof, right: Proof, a: &Formula) -> Proof {
    let ctx = left.conclusion.antecedent.clone();
    assert_eq!(left.conclusion.succedent_formula(), Some(a), "cut formula mismatch");
    assert_eq!(right.conclusion.antecedent, ctx.with(a.clone()), "cut contexts differ");
    let suc = right.conclusion.succedent.clone();
    let s = subst_gpd(&ctx, Some(a), None, Some(&suc));
    Proof::rule_app("cut", s, vec![left, right], Sequent::new(ctx, suc))
}

/// Cut with automatic weakening: from `main : L, a => suc` and
/// `lemma : O => a`, derives `L + O => suc` (one occurrence of `a` is
/// consumed).
pub fn cut_replace(main: Proof, a: &Formula, lemma: Proof) -> Proof {
    assert!(main.conclusion.antecedent.contains(a), "main proof lacks cut formula {a}");
    assert_eq!(lemma.conclusion.succedent_formula(), Some(a));
    let lambda = main.conclusion.antecedent.without(a);
    let ctx = lambda.sum(&lemma.conclusion.antecedent);
    let left = weaken_antecedent_to(lemma, &ctx);
    let right = weaken_antecedent_to(main, &ctx.with(a.clone()));
    cut(left, right, a)
}

/// `(R_imp)`: from `ctx, a => b` to `ctx => a -> b`.
pub fn r_imp(p: Proof, a: &Formula, b: &Formula) -> Proof {
    assert!(p.conclusion.antecedent.contains(a));
    assert_eq!(p.conclusion.succedent_formula(), Some(b));
    let ctx = p.conclusion.antecedent.without(a);
    let s = subst_gpd(&ctx, Some(a), Some(b), None);
    Proof::rule_app("R_imp", s, vec![p], Sequent::to(ctx, Formula::imp(a.clone(), b.clone())))
}

/// `(R_and)`: from `ctx => a` and `ctx => b` to `ctx => a & b`.
pub fn r_and(pa: Proof, pb: Proof) -> Proof {
    let ctx = pa.conclusion.antecedent.clone();
    assert_eq!(pb.conclusion.antecedent, ctx, "R_and contexts differ");
    let a = pa.conclusion.succedent_formula().expect("R_and left premise").clone();
    let b = pb.conclusion.succedent_formula().expect("R_and right premise").clone();
    let s = subst_gpd(&ctx, Some(&a), Some(&b), None);
    Proof::rule_app("R_and", s, vec![pa, pb], Sequent::to(ctx, Formula::and(a, b)))
}

/// `(R_or1)` / `(R_or2)`.
pub fn r_or1(p: Proof, b: &Formula) -> Proof {
    let ctx = p.conclusion.antecedent.clone();
    let a = p.conclusion.succedent_formula().expect("R_or1 premise").clone();
    let s = subst_gpd(&ctx, Some(&a), Some(b), None);
    Proof::rule_app("R_or1", s, vec![p], Sequent::to(ctx, Formula::or(a, b.clone())))
}

pub fn r_or2(p: Proof, a: &Formula) -> Proof {
    let ctx = p.conclusion.antecedent.clone();
    let b = p.conclusion.succedent_formula().expect("R_or2 premise").clone();
    let s = subst_gpd(&ctx, Some(a), Some(&b), None);
    Proof::rule_app("R_or2", s, vec![p], Sequent::to(ctx, Formula::or(a.clone(), b)))
}

/// `(L_and1)`: from `ctx, a => suc` to `ctx, a & b => suc`.
pub fn l_and1(p: Proof, a: &Formula, b: &Formula) -> Proof {
    assert!(p.conclusion.antecedent.contains(a));
    let ctx = p.conclusion.antecedent.without(a);
    let suc = p.conclusion.succedent.clone();
    let s = subst_gpd(&ctx, Some(a), Some(b), Some(&suc));
    Proof::rule_app(
        "L_and1",
        s,
        vec![p],
        Sequent::new(ctx.with(Formula::and(a.clone(), b.clone())), suc),
    )
}

/// `(L_and2)`: from `ctx, b => suc` to `ctx, a & b => suc`.
pub fn l_and2(p: Proof, a: &Formula, b: &Formula) -> Proof {
    assert!(p.conclusion.antecedent.contains(b));
    let ctx = p.conclusion.antecedent.without(b);
    let suc = p.conclusion.succedent.clone();
    let s = subst_gpd(&ctx, Some(a), Some(b), Some(&suc));
    Proof::rule_app(
        "L_and2",
        s,
        vec![p],
        Sequent::new(ctx.with(Formula::and(a.clone(), b.clone())), suc),
    )
}

/// `(L_or)`: from `ctx, a => suc` and `ctx, b => suc` to `ctx, a|b => suc`.
pub fn l_or(pa: Proof, pb: Proof, a: &Formula, b: &Formula) -> Proof {
    let ctx = pa.conclusion.antecedent.without(a);
    assert_eq!(pb.conclusion.antecedent, ctx.with(b.clone()), "L_or contexts differ");
    let suc = pa.conclusion.succedent.clone();
    assert_eq!(pb.conclusion.succedent, suc);
    let s = subst_gpd(&ctx, Some(a), Some(b), Some(&suc));
    Proof::rule_app(
        "L_or",
        s,
        vec![pa, pb],
        Sequent::new(ctx.with(Formula::or(a.clone(), b.clone())), suc),
    )
}

/// `(L_imp)`: from `ctx => a` and `ctx, b => suc` to `ctx, a -> b => suc`.
pub fn l_imp(pa: Proof, pb: Proof, a: &Formula, b: &Formula) -> Proof {
    let ctx = pa.conclusion.antecedent.clone();
    assert_eq!(pa.conclusion.succedent_formula(), Some(a));
    assert_eq!(pb.conclusion.antecedent, ctx.with(b.clone()), "L_imp contexts differ");
    let suc = pb.conclusion.succedent.clone();
    let s = subst_gpd(&ctx, Some(a), Some(b), Some(&suc));
    Proof::rule_app(
        "L_imp",
        s,
        vec![pa, pb],
        Sequent::new(ctx.with(Formula::imp(a.clone(), b.clone())), suc),
    )
}

/// `(K_box)`: from `ctx => a` to `box ctx => box a`.
pub fn k_box(p: Proof) -> Proof {
    let ctx = p.conclusion.antecedent.clone();
    let a = p.conclusion.succedent_formula().expect("K_box premise").clone();
    let s = subst_gpd(&ctx, Some(&a), None, None);
    Proof::rule_app("K_box", s, vec![p], Sequent::to(ctx.boxed(), Formula::boxed(a)))
}

/// `(K_dia)`: from `ctx, a => b` to `box ctx, dia a => dia b`.
pub fn k_dia(p: Proof, a: &Formula) -> Proof {
    assert!(p.conclusion.antecedent.contains(a));
    let ctx = p.conclusion.antecedent.without(a);
    let b = p.conclusion.succedent_formula().expect("K_dia premise").clone();
    let s = subst_gpd(&ctx, Some(a), Some(&b), None);
    Proof::rule_app(
        "K_dia",
        s,
        vec![p],
        Sequent::to(ctx.boxed().with(Formula::dia(a.clone())), Formula::dia(b)),
    )
}

/// `(dia_L)`: from `ctx, a => b` to `ctx, dia a => dia b`.
pub fn dia_l(p: Proof, a: &Formula) -> Proof {
    assert!(p.conclusion.antecedent.contains(a));
    let ctx = p.conclusion.antecedent.without(a);
    let b = p.conclusion.succedent_formula().expect("dia_L premise").clone();
    let s = subst_gpd(&ctx, Some(a), Some(&b), None);
    Proof::rule_app(
        "dia_L",
        s,
        vec![p],
        Sequent::to(ctx.with(Formula::dia(a.clone())), Formula::dia(b)),
    )
}

/// Instance of a zero-premise axiom schema `=> A` under an atom substitution.
pub fn axiom_instance(name: &str, schema_formula: &Formula, s: &Substitution) -> Proof {
    let inst = crate::formula::apply_subst(schema_formula, s);
    Proof::rule_app(name, s.clone(), vec![], Sequent::concl(inst))
}

/// `ctx => m` for a member `m` of `ctx` (single `(id)` node).
pub fn prove_member(ctx: &FMultiset, m: &Formula) -> Proof {
    assert!(ctx.contains(m));
    ax_id(&ctx.without(m), m)
}

/// Folds `ctx => m_i` proofs into `ctx => m_1 & ... & m_n` (left fold).
/// With no members, yields `ctx => top`.
pub fn fold_r_and(ctx: &FMultiset, proofs: Vec<Proof>) -> Proof {
    let mut it = proofs.into_iter();
    match it.next() {
        None => ax_r_top(ctx),
        Some(first) => it.fold(first, r_and),
    }
}

/// `{tree} => leaf` where `leaf` sits at `path` in `tree`'s conjunction
/// structure (`true` = left child).
pub fn proj_path(tree: &Formula, path: &[bool]) -> Proof {
    let mut spine: Vec<(bool, Formula, Formula)> = Vec::new(); // (went_left, this, sibling)
    let mut cur = tree.clone();
    for &left in path {
        let (a, b) = match cur.node() {
            Node::And(a, b) => (a.clone(), b.clone()),
            _ => panic!("proj_path: {cur} is not a conjunction"),
        };
        if left {
            spine.push((true, a.clone(), b));
            cur = a;
        } else {
            spine.push((false, b.clone(), a));
            cur = b;
        }
    }
    let mut p = ax_id(&FMultiset::new(), &cur);
    for (went_left, this, sibling) in spine.into_iter().rev() {
        p = if went_left { l_and1(p, &this, &sibling) } else { l_and2(p, &sibling, &this) };
    }
    p
}

/// `{ big_and(members) } => members[i]`: identity plus a projection chain.
pub fn proj_member(members: &[Formula], i: usize) -> Proof {
    assert!(i < members.len());
    let mut p = ax_id(&FMultiset::new(), &members[i]);
    // wrap members[i] into the prefix conjunction it first appears in
    if i > 0 {
        let prefix = big_and_list(&members[..i]);
        p = l_and2(p, &prefix, &members[i]);
    }
    for k in (i + 1).max(1)..members.len() {
        let prefix = big_and_list(&members[..k]);
        p = l_and1(p, &prefix, &members[k]);
    }
    p
}

/// `ctx => big_and(members)` from per-member `ctx => m` proofs supplied by
/// the callback, folded in list order.
pub fn prove_big_and_with(ctx: &FMultiset, members: &[Formula], mut member_proof: impl FnMut(&Formula) -> Proof) -> Proof {
    fold_r_and(ctx, members.iter().map(|m| member_proof(m)).collect())
}

/// From `ctx => members[i]` to `ctx => big_or(members)`.
pub fn or_inject(p: Proof, members: &[Formula], i: usize) -> Proof {
    assert!(i < members.len());
    assert_eq!(p.conclusion.succedent_formula(), Some(&members[i]));
    let mut out = p;
    if i > 0 {
        let prefix = crate::formula::big_or_list(&members[..i]);
        out = r_or2(out, &prefix);
    }
    for k in (i + 1).max(1)..members.len() {
        out = r_or1(out, &members[k]);
    }
    out
}

/// From per-member proofs of `ctx, m_i => suc` to `ctx, big_or(members) => suc`.
pub fn or_elim(proofs: Vec<Proof>, members: &[Formula]) -> Proof {
    assert_eq!(proofs.len(), members.len());
    assert!(!members.is_empty());
    let mut it = proofs.into_iter();
    let mut acc = it.next().unwrap();
    let mut prefix = members[0].clone();
    for (p, m) in it.zip(&members[1..]) {
        acc = l_or(acc, p, &prefix, m);
        prefix = Formula::or(prefix, m.clone());
    }
    acc
}

/// Replaces the listed antecedent occurrences by their conjunction:
/// from `ctx + members => suc` to `ctx + {big_and(members)} => suc`.
/// With no members the conjunction is `top`, added by weakening.
pub fn collapse_antecedent(p: Proof, members: &[Formula]) -> Proof {
    if members.is_empty() {
        return weaken_left_one(p, &Formula::top());
    }
    let conj = big_and_list(members);
    let target = p
        .conclusion
        .antecedent
        .minus(&members.iter().cloned().collect())
        .with(conj.clone());
    let mut out = p;
    for (i, m) in members.iter().enumerate() {
        // wrap this occurrence of m into the full conjunction
        assert!(out.conclusion.antecedent.contains(m), "collapse: missing member {m}");
        if i > 0 {
            let prefix = big_and_list(&members[..i]);
            out = l_and2(out, &prefix, m);
        }
        for k in (i + 1).max(1)..members.len() {
            let prefix = big_and_list(&members[..k]);
            out = l_and1(out, &prefix, &members[k]);
        }
    }
    contract_antecedent_to(out, &target)
}

/// `ctx, a, a -> b => b` (modus ponens shape).
pub fn mp(ctx: &FMultiset, a: &Formula, b: &Formula) -> Proof {
    let inner = ctx.with(a.clone());
    let p1 = prove_member(&inner, a);
    let p2 = ax_id(&inner, b);
    l_imp(p1, p2, a, b)
}

/// CK-proof of `box /\G => /\ box G`; fails on the empty multiset.
pub fn prove_box_distribution(gamma: &FMultiset) -> crate::error::Result<Proof> {
    if gamma.is_empty() {
        return Err(crate::error::Error::EmptyMultiset);
    }
    let members = gamma.to_vec();
    let conj = big_and_list(&members);
    let ctx = FMultiset::singleton(Formula::boxed(conj));
    // box /\G => box g for each member of box G (its own canonical order),
    // then fold with R_and.
    let mut per: Vec<Proof> = Vec::new();
    for bg in gamma.boxed().iter_flat() {
        let g = match bg.node() {
            Node::Box(g) => g.clone(),
            _ => unreachable!(),
        };
        let idx = members.iter().position(|m| *m == g).expect("member of gamma");
        per.push(k_box(proj_member(&members, idx)));
    }
    Ok(fold_r_and(&ctx, per))
}

/// Proof of `ctx => a -> a` (LJ only).
pub fn prove_reflexive_implication(a: &Formula, ctx: &FMultiset) -> Proof {
    r_imp(ax_id(ctx, a), a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::proof::check_proof;

    fn p() -> Formula {
        Formula::atom("p")
    }
    fn q() -> Formula {
        Formula::atom("q")
    }
    fn r() -> Formula {
        Formula::atom("r")
    }

    fn lj_valid(pf: &Proof) {
        let lj = builtin("LJ").unwrap();
        let v = check_proof(&lj, pf, &[]);
        assert!(v.is_valid(), "{v}: {:?}", pf.conclusion);
    }

    fn ck_valid(pf: &Proof) {
        let ck = builtin("CK").unwrap();
        let v = check_proof(&ck, pf, &[]);
        assert!(v.is_valid(), "{v}: {:?}", pf.conclusion);
    }

    #[test]
    fn cut_replace_and_weaken() {
        // main: {q}, p => q ; lemma: r, r -> p => p ; result keeps q's context
        let main = prove_member(&[q(), p()].into_iter().collect(), &q());
        let lemma = mp(&FMultiset::new(), &r(), &p());
        let out = cut_replace(main, &p(), lemma);
        assert_eq!(
            out.conclusion,
            Sequent::to([q(), r(), Formula::imp(r(), p())].into_iter().collect(), q())
        );
        lj_valid(&out);
    }

    #[test]
    fn proj_and_fold() {
        let members = vec![p(), q(), r()];
        for i in 0..members.len() {
            let pf = proj_member(&members, i);
            assert_eq!(
                pf.conclusion,
                Sequent::to(FMultiset::singleton(big_and_list(&members)), members[i].clone())
            );
            lj_valid(&pf);
        }
        let ctx: FMultiset = members.iter().cloned().collect();
        let fold = prove_big_and_with(&ctx, &members, |m| prove_member(&ctx, m));
        assert_eq!(fold.conclusion, Sequent::to(ctx.clone(), big_and_list(&members)));
        lj_valid(&fold);
        let none = fold_r_and(&ctx, vec![]);
        assert_eq!(none.conclusion, Sequent::to(ctx, Formula::top()));
        lj_valid(&none);
    }

    #[test]
    fn or_inject_and_elim() {
        let members = vec![p(), q(), r()];
        for i in 0..members.len() {
            let base = ax_id(&FMultiset::new(), &members[i]);
            let inj = or_inject(base, &members, i);
            assert_eq!(
                inj.conclusion,
                Sequent::to(
                    FMultiset::singleton(members[i].clone()),
                    crate::formula::big_or_list(&members)
                )
            );
            lj_valid(&inj);
        }
        let suc = FMultiset::singleton(p());
        let proofs: Vec<Proof> = members
            .iter()
            .map(|m| weaken_left_one(ax_id(&FMultiset::new(), &p()), m))
            .collect();
        let el = or_elim(proofs, &members);
        assert_eq!(
            el.conclusion,
            Sequent::new(
                FMultiset::singleton(crate::formula::big_or_list(&members)).with(p()),
                suc
            )
        );
        lj_valid(&el);
    }

    #[test]
    fn collapse_with_duplicates_and_empty() {
        let members = vec![p(), p(), q()];
        let ctx: FMultiset = members.iter().cloned().collect();
        let base = prove_member(&ctx.with(r()), &r());
        let out = collapse_antecedent(base, &members);
        assert_eq!(
            out.conclusion,
            Sequent::to(
                FMultiset::singleton(big_and_list(&members)).with(r()),
                r()
            )
        );
        lj_valid(&out);

        let empty = collapse_antecedent(ax_id(&FMultiset::new(), &p()), &[]);
        assert_eq!(
            empty.conclusion,
            Sequent::to(FMultiset::singleton(Formula::top()).with(p()), p())
        );
        lj_valid(&empty);
    }

    #[test]
    fn mp_checks() {
        let pf = mp(&FMultiset::singleton(r()), &p(), &q());
        assert_eq!(
            pf.conclusion,
            Sequent::to(
                [r(), p(), Formula::imp(p(), q())].into_iter().collect(),
                q()
            )
        );
        lj_valid(&pf);
    }

    #[test]
    fn box_distribution_examples() {
        // singleton
        let g1 = FMultiset::singleton(p());
        let d1 = prove_box_distribution(&g1).unwrap();
        assert_eq!(
            d1.conclusion,
            Sequent::to(
                FMultiset::singleton(Formula::boxed(p())),
                Formula::boxed(p())
            )
        );
        ck_valid(&d1);
        // {p, q}
        let g2: FMultiset = [p(), q()].into_iter().collect();
        let d2 = prove_box_distribution(&g2).unwrap();
        assert_eq!(
            d2.conclusion,
            Sequent::to(
                FMultiset::singleton(Formula::boxed(Formula::and(p(), q()))),
                Formula::and(Formula::boxed(p()), Formula::boxed(q()))
            )
        );
        ck_valid(&d2);
        // {p, q, r} checked in CK
        let g3: FMultiset = [p(), q(), r()].into_iter().collect();
        ck_valid(&prove_box_distribution(&g3).unwrap());
        assert!(prove_box_distribution(&FMultiset::new()).is_err());
    }

    #[test]
    fn reflexive_implication() {
        let pf = prove_reflexive_implication(&p(), &FMultiset::new());
        assert_eq!(pf.conclusion, Sequent::concl(Formula::imp(p(), p())));
        lj_valid(&pf);
        let with_ctx = prove_reflexive_implication(
            &Formula::and(q(), r()),
            &FMultiset::singleton(Formula::atom("s")),
        );
        lj_valid(&with_ctx);
        assert_eq!(
            with_ctx.conclusion.succedent_formula().unwrap().to_string(),
            "q & r -> q & r"
        );
    }
}
