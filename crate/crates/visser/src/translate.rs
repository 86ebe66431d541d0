//! The angled-atom translation `t`, the standard substitution `s`, the
//! commutation sets for basic/almost-positive/constructive patterns, and
//! Harrop decomposition. All emitted proofs are CK-proofs.

use std::collections::BTreeMap;

use crate::classify::{ClassMemo, FormulaClass};
use crate::combinator::{
    ax_id, ax_l_bot, ax_r_top, cut, cut_replace, fold_r_and, k_box, k_dia, l_and1, l_and2, l_imp,
    l_or, mp, prove_big_and_with, prove_member, prove_reflexive_implication, r_and, r_imp, r_or1,
    r_or2, weaken_antecedent_to, weaken_left_one,
};
use crate::error::{Error, Result};
use crate::formula::{FMultiset, Formula, Node, Sequent};
use crate::proof::Proof;

/// `t : L -> L+`. Atoms and `top` become their angled names; compounds keep
/// their structure and are conjoined with their own angled name.
pub fn trans_t(a: &Formula) -> Result<Formula> {
    if a.contains_angled() {
        return Err(Error::AngledAtomPresent);
    }
    Ok(trans_t_unchecked(a))
}

fn trans_t_unchecked(a: &Formula) -> Formula {
    let angled = |f: &Formula| Formula::angled(f.clone()).expect("payload is plain");
    match a.node() {
        Node::Bot => Formula::bot(),
        Node::Top | Node::Atom(_) => angled(a),
        Node::And(x, y) => Formula::and(
            Formula::and(trans_t_unchecked(x), trans_t_unchecked(y)),
            angled(a),
        ),
        Node::Or(x, y) => Formula::and(
            Formula::or(trans_t_unchecked(x), trans_t_unchecked(y)),
            angled(a),
        ),
        Node::Imp(x, y) => Formula::and(
            Formula::imp(trans_t_unchecked(x), trans_t_unchecked(y)),
            angled(a),
        ),
        Node::Box(x) => Formula::and(Formula::boxed(trans_t_unchecked(x)), angled(a)),
        Node::Dia(x) => Formula::and(Formula::dia(trans_t_unchecked(x)), angled(a)),
        Node::Angled(_) => unreachable!("checked above"),
    }
}

pub fn trans_t_multiset(g: &FMultiset) -> Result<FMultiset> {
    if g.iter_flat().any(|f| f.contains_angled()) {
        return Err(Error::AngledAtomPresent);
    }
    Ok(g.map(trans_t_unchecked))
}

/// `s : L+ -> L`, replacing each angled atom by its payload.
pub fn subst_s(a: &Formula) -> Formula {
    match a.node() {
        Node::Angled(inner) => inner.clone(),
        Node::Atom(_) | Node::Top | Node::Bot => a.clone(),
        Node::And(x, y) => Formula::and(subst_s(x), subst_s(y)),
        Node::Or(x, y) => Formula::or(subst_s(x), subst_s(y)),
        Node::Imp(x, y) => Formula::imp(subst_s(x), subst_s(y)),
        Node::Box(x) => Formula::boxed(subst_s(x)),
        Node::Dia(x) => Formula::dia(subst_s(x)),
    }
}

/// CK-proof of `a^t => <a>`: identity on atoms, a single right-conjunct
/// projection on compounds.
pub fn prove_t_implies_angle(a: &Formula) -> Result<Proof> {
    let at = trans_t(a)?;
    let angled = Formula::angled(a.clone())?;
    Ok(match at.node() {
        Node::Bot => ax_l_bot(&FMultiset::new(), &FMultiset::singleton(angled)),
        Node::Angled(_) => ax_id(&FMultiset::new(), &angled),
        Node::And(left, right) => {
            debug_assert_eq!(right, &angled);
            l_and2(ax_id(&FMultiset::new(), &angled), left, &angled)
        }
        _ => unreachable!("translations are bot, angled, or conjunctions"),
    })
}

/// Both directions of `s(t(A)) <=> A` in CK.
pub fn prove_st_equivalence(a: &Formula) -> Result<(Proof, Proof)> {
    if a.contains_angled() {
        return Err(Error::AngledAtomPresent);
    }
    Ok(st_equiv(a))
}

/// (s(t(A)) => A, A => s(t(A)))
fn st_equiv(a: &Formula) -> (Proof, Proof) {
    let st = subst_s(&trans_t_unchecked(a));
    let fwd = match a.node() {
        // on atoms and constants s(t(A)) = A syntactically
        Node::Atom(_) | Node::Top | Node::Bot => ax_id(&FMultiset::new(), a),
        // compounds: second conjunct of s(t(A)) is A itself
        _ => match st.node() {
            Node::And(_, r) => {
                debug_assert_eq!(r, a);
                l_and2(ax_id(&FMultiset::new(), a), &subformula_st(a), a)
            }
            _ => unreachable!(),
        },
    };
    let bwd = match a.node() {
        Node::Atom(_) | Node::Top | Node::Bot => ax_id(&FMultiset::new(), a),
        Node::And(x, y) => {
            let (_, bx) = st_equiv(x);
            let (_, by) = st_equiv(y);
            let px = l_and1(bx, x, y);
            let py = l_and2(by, x, y);
            pair_with_self(a, r_and(px, py))
        }
        Node::Or(x, y) => {
            let (_, bx) = st_equiv(x);
            let (_, by) = st_equiv(y);
            let stx = subst_s(&trans_t_unchecked(x));
            let sty = subst_s(&trans_t_unchecked(y));
            let px = r_or1(bx, &sty);
            let py = r_or2(by, &stx);
            pair_with_self(a, l_or(px, py, x, y))
        }
        Node::Imp(x, y) => {
            let (fx, _) = st_equiv(x);
            let (_, by) = st_equiv(y);
            let stx = subst_s(&trans_t_unchecked(x));
            let sty = subst_s(&trans_t_unchecked(y));
            // stx, x -> y => sty
            let p2 = weaken_antecedent_to(by, &[stx.clone(), y.clone()].into_iter().collect());
            let inner = l_imp(fx, p2, x, y);
            pair_with_self(a, r_imp(inner, &stx, &sty))
        }
        Node::Box(x) => {
            let (_, bx) = st_equiv(x);
            pair_with_self(a, k_box(bx))
        }
        Node::Dia(x) => {
            let (_, bx) = st_equiv(x);
            pair_with_self(a, k_dia(bx, x))
        }
        Node::Angled(_) => unreachable!(),
    };
    (fwd, bwd)
}

fn subformula_st(a: &Formula) -> Formula {
    match subst_s(&trans_t_unchecked(a)).node() {
        Node::And(l, _) => l.clone(),
        _ => unreachable!(),
    }
}

/// `a => s(t(a)) & <a>^s`, pairing a derivation of the structural part with
/// identity on `a` itself.
fn pair_with_self(a: &Formula, structural: Proof) -> Proof {
    debug_assert_eq!(
        structural.conclusion.antecedent,
        FMultiset::singleton(a.clone()),
        "structural part must assume exactly a"
    );
    let self_part = ax_id(&FMultiset::new(), a);
    r_and(structural, self_part)
}

/// Which commutation clause to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommuteClass {
    Basic,
    AlmostPositive,
    Constructive,
}

impl CommuteClass {
    fn formula_class(self) -> FormulaClass {
        match self {
            CommuteClass::Basic => FormulaClass::Basic,
            CommuteClass::AlmostPositive => FormulaClass::AlmostPositive,
            CommuteClass::Constructive => FormulaClass::Constructive,
        }
    }
}

/// Output of the commutation construction: a multiset of modal Horn
/// formulas over angled atoms, the provable direction(s), and the proof
/// that the standard substitution sees the set as CK-provable.
pub struct CommutationResult {
    pub horns: FMultiset,
    /// `horns, (A(args))^t => A(args^t)` (basic and almost positive).
    pub forward: Option<Proof>,
    /// basic: `horns, A(args^t) => (A(args))^t`; constructive adds the
    /// angled name: `horns, <A(args)>, A(args^t) => (A(args))^t`.
    pub backward: Option<Proof>,
    /// `=> /\ horns^s`.
    pub sigma: Proof,
    /// per-member proofs of `=> e^s`, for callers that merge the set into a
    /// larger multiset before discharging
    pub sigma_parts: BTreeMap<Formula, Proof>,
}

/// Instantiation data for a pattern `A(p...)` applied to arguments.
struct Pattern<'a> {
    args: &'a BTreeMap<Formula, Formula>,
}

impl<'a> Pattern<'a> {
    /// `A(args)`
    fn inst(&self, f: &Formula) -> Formula {
        match f.node() {
            Node::Atom(_) => self.args.get(f).cloned().unwrap_or_else(|| f.clone()),
            Node::Angled(_) => f.clone(),
            Node::Top | Node::Bot => f.clone(),
            Node::And(a, b) => Formula::and(self.inst(a), self.inst(b)),
            Node::Or(a, b) => Formula::or(self.inst(a), self.inst(b)),
            Node::Imp(a, b) => Formula::imp(self.inst(a), self.inst(b)),
            Node::Box(a) => Formula::boxed(self.inst(a)),
            Node::Dia(a) => Formula::dia(self.inst(a)),
        }
    }

    /// `A(args^t)`
    fn inst_t(&self, f: &Formula) -> Formula {
        match f.node() {
            Node::Atom(_) => match self.args.get(f) {
                Some(v) => trans_t_unchecked(v),
                None => trans_t_unchecked(f),
            },
            Node::Angled(_) => f.clone(),
            Node::Top | Node::Bot => f.clone(),
            Node::And(a, b) => Formula::and(self.inst_t(a), self.inst_t(b)),
            Node::Or(a, b) => Formula::or(self.inst_t(a), self.inst_t(b)),
            Node::Imp(a, b) => Formula::imp(self.inst_t(a), self.inst_t(b)),
            Node::Box(a) => Formula::boxed(self.inst_t(a)),
            Node::Dia(a) => Formula::dia(self.inst_t(a)),
        }
    }
}

struct Commute<'a> {
    pat: Pattern<'a>,
    memo: ClassMemo,
    /// per-member proofs of `=> e^s`, assembled into sigma at the end
    sigma_parts: BTreeMap<Formula, Proof>,
}

struct Piece {
    horns: FMultiset,
    forward: Option<Proof>,
    backward: Option<Proof>,
}

impl<'a> Commute<'a> {
    fn angled(&self, f: &Formula) -> Formula {
        Formula::angled(self.pat.inst(f)).expect("arguments are plain modal formulas")
    }

    fn record_sigma(&mut self, horn: &Formula, proof: impl FnOnce() -> Proof) {
        if !self.sigma_parts.contains_key(horn) {
            let p = proof();
            debug_assert_eq!(p.conclusion, Sequent::concl(subst_s(horn)));
            self.sigma_parts.insert(horn.clone(), p);
        }
    }

    /// Basic clause: both directions.
    fn basic(&mut self, a: &Formula) -> Piece {
        match a.node() {
            Node::Atom(_) | Node::Bot | Node::Angled(_) => {
                let at = self.pat.inst_t(a);
                let inst_translated = trans_t_unchecked(&self.pat.inst(a));
                debug_assert_eq!(at, inst_translated);
                let fwd = ax_id(&FMultiset::new(), &at);
                Piece { horns: FMultiset::new(), forward: Some(fwd.clone()), backward: Some(fwd) }
            }
            Node::Top => {
                let ang = self.angled(a); // <top>
                let horns = FMultiset::singleton(ang.clone());
                // <top>, <top> => top and <top>, top => <top>
                let fwd = ax_r_top(&[ang.clone(), ang.clone()].into_iter().collect());
                let bwd = ax_id(&FMultiset::singleton(Formula::top()), &ang);
                self.record_sigma(&ang, || ax_r_top(&FMultiset::new()));
                Piece { horns, forward: Some(fwd), backward: Some(bwd) }
            }
            Node::And(b, c) => {
                let pb = self.basic(b);
                let pc = self.basic(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_b = self.angled(b);
                let ang_c = self.angled(c);
                let ang_a = self.angled(a);
                let fr = Formula::imp(Formula::and(ang_b.clone(), ang_c.clone()), ang_a.clone());
                let horns = pb.horns.sum(&pc.horns).with(fr.clone());
                let at = trans_t_unchecked(&self.pat.inst(a));
                let at2 = self.pat.inst_t(a);

                // forward: horns, (A)^t => A(args^t)
                let ctx_f = horns.with(at.clone());
                let f1 = {
                    // from pb.forward : pb.horns, bt => bt2, lift bt into (A)^t
                    let p = pb.forward.clone().unwrap();
                    let p = l_and1(p, &bt, &ct);
                    let p = l_and1(p, &Formula::and(bt.clone(), ct.clone()), &ang_a);
                    weaken_antecedent_to(p, &ctx_f)
                };
                let f2 = {
                    let p = pc.forward.clone().unwrap();
                    let p = l_and2(p, &bt, &ct);
                    let p = l_and1(p, &Formula::and(bt.clone(), ct.clone()), &ang_a);
                    weaken_antecedent_to(p, &ctx_f)
                };
                let forward = r_and(f1, f2);
                debug_assert_eq!(forward.conclusion.succedent_formula(), Some(&at2));

                // backward: horns, A(args^t) => (A)^t
                let ctx_b = horns.with(at2.clone());
                let b1 = {
                    let p = pb.backward.clone().unwrap(); // pb.horns, bt2 => bt
                    let p = l_and1(p, &bt2, &ct2);
                    weaken_antecedent_to(p, &ctx_b)
                };
                let b2 = {
                    let p = pc.backward.clone().unwrap();
                    let p = l_and2(p, &bt2, &ct2);
                    weaken_antecedent_to(p, &ctx_b)
                };
                let struct_part = r_and(b1, b2); // ctx_b => bt & ct
                // angled part: bt & ct => <B> & <C>; then modus ponens on fr
                let proj_b = l_and1(prove_t_implies_angle(&self.pat.inst(b)).unwrap(), &bt, &ct);
                let proj_c = l_and2(prove_t_implies_angle(&self.pat.inst(c)).unwrap(), &bt, &ct);
                let angles = r_and(proj_b, proj_c); // {bt & ct} => <B> & <C>
                let and_bc = Formula::and(bt.clone(), ct.clone());
                let angles_ctx = cut_replace(angles, &and_bc, struct_part.clone());
                let and_angles = Formula::and(ang_b.clone(), ang_c.clone());
                let mp_fr = mp(&FMultiset::new(), &and_angles, &ang_a);
                let named = cut_replace(mp_fr, &and_angles, angles_ctx);
                let named = crate::combinator::contract_antecedent_to(named, &ctx_b);
                let backward = r_and(struct_part, named);
                debug_assert_eq!(backward.conclusion.succedent_formula(), Some(&at));

                let inst_bc = Formula::and(self.pat.inst(b), self.pat.inst(c));
                self.record_sigma(&fr, || {
                    // => (<B> & <C> -> <A>)^s, i.e. B & C -> B & C
                    prove_reflexive_implication(&inst_bc, &FMultiset::new())
                });
                Piece { horns, forward: Some(forward), backward: Some(backward) }
            }
            Node::Or(b, c) => {
                let pb = self.basic(b);
                let pc = self.basic(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_b = self.angled(b);
                let ang_c = self.angled(c);
                let ang_a = self.angled(a);
                let fr_b = Formula::imp(ang_b.clone(), ang_a.clone());
                let fr_c = Formula::imp(ang_c.clone(), ang_a.clone());
                let horns = pb.horns.sum(&pc.horns).with(fr_b.clone()).with(fr_c.clone());
                let at = trans_t_unchecked(&self.pat.inst(a));
                let at2 = self.pat.inst_t(a);

                // forward
                let ctx_f = horns.with(at.clone());
                let f_b = r_or1(pb.forward.clone().unwrap(), &ct2);
                let f_c = r_or2(pc.forward.clone().unwrap(), &bt2);
                let f_b = weaken_antecedent_to(f_b, &horns.with(bt.clone()));
                let f_c = weaken_antecedent_to(f_c, &horns.with(ct.clone()));
                let disj = l_or(f_b, f_c, &bt, &ct);
                let disj = l_and1(disj, &Formula::or(bt.clone(), ct.clone()), &ang_a);
                let forward = weaken_antecedent_to(disj, &ctx_f);
                debug_assert_eq!(forward.conclusion.succedent_formula(), Some(&at2));

                // backward, one branch per disjunct: struct part injects into
                // bt | ct, named part goes through <X> and fr_X
                let mk_branch = |piece: &Piece,
                                 inst_this: Formula,
                                 this_t: &Formula,
                                 this_t2: &Formula,
                                 ang_this: &Formula,
                                 fr_this: &Formula,
                                 left: bool| {
                    let struct_p = if left {
                        r_or1(piece.backward.clone().unwrap(), &ct)
                    } else {
                        r_or2(piece.backward.clone().unwrap(), &bt)
                    };
                    let lemma = prove_t_implies_angle(&inst_this).unwrap(); // {this_t} => <this>
                    let named0 = cut_replace(lemma, this_t, piece.backward.clone().unwrap());
                    let mp_fr = mp(&FMultiset::new(), ang_this, &ang_a);
                    let named = cut_replace(mp_fr, ang_this, named0);
                    let ctx = piece.horns.with(this_t2.clone()).with(fr_this.clone());
                    let named = weaken_antecedent_to(named, &ctx);
                    let struct_p = weaken_antecedent_to(struct_p, &ctx);
                    r_and(struct_p, named)
                };
                let b_side = mk_branch(&pb, self.pat.inst(b), &bt, &bt2, &ang_b, &fr_b, true);
                let c_side = mk_branch(&pc, self.pat.inst(c), &ct, &ct2, &ang_c, &fr_c, false);
                let b_side = weaken_antecedent_to(b_side, &horns.with(bt2.clone()));
                let c_side = weaken_antecedent_to(c_side, &horns.with(ct2.clone()));
                let backward = l_or(b_side, c_side, &bt2, &ct2);
                debug_assert_eq!(backward.conclusion.antecedent, horns.with(at2.clone()));
                debug_assert_eq!(backward.conclusion.succedent_formula(), Some(&at));

                let inst_b = self.pat.inst(b);
                let inst_c = self.pat.inst(c);
                self.record_sigma(&fr_b, || {
                    let base = ax_id(&FMultiset::new(), &inst_b);
                    r_imp(r_or1(base, &inst_c), &inst_b, &Formula::or(inst_b.clone(), inst_c.clone()))
                });
                let inst_b = self.pat.inst(b);
                let inst_c = self.pat.inst(c);
                self.record_sigma(&fr_c, || {
                    let base = ax_id(&FMultiset::new(), &inst_c);
                    r_imp(r_or2(base, &inst_b), &inst_c, &Formula::or(inst_b.clone(), inst_c.clone()))
                });
                Piece { horns, forward: Some(forward), backward: Some(backward) }
            }
            Node::Dia(b) => {
                let pb = self.basic(b);
                let bt = trans_t_unchecked(&self.pat.inst(b));
                let bt2 = self.pat.inst_t(b);
                let ang_b = self.angled(b);
                let ang_a = self.angled(a);
                let fr = Formula::imp(Formula::dia(ang_b.clone()), ang_a.clone());
                let horns = pb.horns.boxed().with(fr.clone());
                let at = trans_t_unchecked(&self.pat.inst(a));
                let at2 = self.pat.inst_t(a);

                // forward: K_dia on pb.forward, then wrap
                let kf = k_dia(pb.forward.clone().unwrap(), &bt);
                let kf = l_and1(kf, &Formula::dia(bt.clone()), &ang_a);
                let forward = weaken_antecedent_to(kf, &horns.with(at.clone()));
                debug_assert_eq!(forward.conclusion.succedent_formula(), Some(&at2));

                // backward
                let kb = k_dia(pb.backward.clone().unwrap(), &bt2); // box pbh, dia bt2 => dia bt
                let lemma = prove_t_implies_angle(&self.pat.inst(b)).unwrap(); // {bt} => <B>
                let dlemma = k_dia(lemma, &bt); // dia bt => dia <B>
                let ctx0 = pb.horns.boxed().with(Formula::dia(bt2.clone()));
                let to_dia_angle = cut(kb.clone(), weaken_antecedent_to(dlemma, &ctx0.with(Formula::dia(bt.clone()))), &Formula::dia(bt.clone()));
                let mp_fr = mp(&FMultiset::new(), &Formula::dia(ang_b.clone()), &ang_a);
                let named = cut_replace(mp_fr, &Formula::dia(ang_b.clone()), to_dia_angle);
                let ctx_b = horns.with(at2.clone());
                let named = weaken_antecedent_to(named, &ctx_b);
                let struct_p = weaken_antecedent_to(kb, &ctx_b);
                let backward = r_and(struct_p, named);
                debug_assert_eq!(backward.conclusion.succedent_formula(), Some(&at));

                // sigma: box-lift the sub-members, add fr's own proof
                for (horn, _) in pb.horns.iter() {
                    let sub = self.sigma_parts.get(horn).cloned();
                    let boxed_horn = Formula::boxed(horn.clone());
                    if let Some(sub) = sub {
                        self.record_sigma(&boxed_horn, || k_box(sub));
                    }
                }
                let inst_b = self.pat.inst(b);
                let inst_a = self.pat.inst(a);
                self.record_sigma(&fr, || {
                    prove_reflexive_implication(&Formula::dia(inst_b.clone()), &FMultiset::new())
                });
                debug_assert_eq!(subst_s(&fr), Formula::imp(Formula::dia(inst_b), inst_a.clone()));
                Piece { horns, forward: Some(forward), backward: Some(backward) }
            }
            Node::Imp(..) | Node::Box(..) => unreachable!("not basic"),
        }
    }

    /// Almost positive clause: forward only.
    fn almost_positive(&mut self, a: &Formula) -> Piece {
        if self.memo.basic(a) {
            return self.basic(a);
        }
        match a.node() {
            Node::And(b, c) => {
                let pb = self.almost_positive(b);
                let pc = self.almost_positive(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let ang_a = self.angled(a);
                let horns = pb.horns.sum(&pc.horns);
                let at = trans_t_unchecked(&self.pat.inst(a));
                let ctx = horns.with(at.clone());
                let lift = |p: Proof, left: bool| {
                    let p = if left { l_and1(p, &bt, &ct) } else { l_and2(p, &bt, &ct) };
                    let p = l_and1(p, &Formula::and(bt.clone(), ct.clone()), &ang_a);
                    weaken_antecedent_to(p, &ctx)
                };
                let forward = r_and(lift(pb.forward.unwrap(), true), lift(pc.forward.unwrap(), false));
                Piece { horns, forward: Some(forward), backward: None }
            }
            Node::Or(b, c) => {
                let pb = self.almost_positive(b);
                let pc = self.almost_positive(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_a = self.angled(a);
                let horns = pb.horns.sum(&pc.horns);
                let f_b = r_or1(pb.forward.unwrap(), &ct2);
                let f_c = r_or2(pc.forward.unwrap(), &bt2);
                let f_b = weaken_antecedent_to(f_b, &horns.with(bt.clone()));
                let f_c = weaken_antecedent_to(f_c, &horns.with(ct.clone()));
                let disj = l_or(f_b, f_c, &bt, &ct);
                let forward = l_and1(disj, &Formula::or(bt, ct), &ang_a);
                Piece { horns, forward: Some(forward), backward: None }
            }
            Node::Box(b) => {
                let pb = self.almost_positive(b);
                let bt = trans_t_unchecked(&self.pat.inst(b));
                let ang_a = self.angled(a);
                let horns = pb.horns.boxed();
                let kf = k_box(pb.forward.unwrap());
                let forward = l_and1(kf, &Formula::boxed(bt), &ang_a);
                self.box_sigma(&pb.horns);
                Piece { horns, forward: Some(forward), backward: None }
            }
            Node::Dia(b) => {
                let pb = self.almost_positive(b);
                let bt = trans_t_unchecked(&self.pat.inst(b));
                let ang_a = self.angled(a);
                let horns = pb.horns.boxed();
                let kf = k_dia(pb.forward.unwrap(), &bt);
                let forward = l_and1(kf, &Formula::dia(bt), &ang_a);
                self.box_sigma(&pb.horns);
                Piece { horns, forward: Some(forward), backward: None }
            }
            Node::Imp(b, c) => {
                // b basic, c almost positive
                let pb = self.basic(b);
                let pc = self.almost_positive(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_a = self.angled(a);
                let horns = pb.horns.sum(&pc.horns);
                // (11) pb.backward : pb.horns, bt2 => bt ; (12) pc.forward
                let ctx = horns.with(bt2.clone());
                let p11 = weaken_antecedent_to(pb.backward.unwrap(), &ctx);
                let p12 = weaken_antecedent_to(pc.forward.unwrap(), &ctx.with(ct.clone()));
                let li = l_imp(p11, p12, &bt, &ct);
                let ri = r_imp(li, &bt2, &ct2);
                let forward = l_and1(ri, &Formula::imp(bt, ct), &ang_a);
                Piece { horns, forward: Some(forward), backward: None }
            }
            _ => unreachable!("atoms are basic"),
        }
    }

    /// Constructive clause: backward with the angled-name antecedent.
    fn constructive(&mut self, a: &Formula) -> Piece {
        if self.memo.basic(a) {
            let p = self.basic(a);
            // weaken the angled name into the basic backward proof
            let ang_a = self.angled(a);
            let backward = weaken_left_one(p.backward.unwrap(), &ang_a);
            return Piece { horns: p.horns, forward: p.forward, backward: Some(backward) };
        }
        match a.node() {
            Node::And(b, c) => {
                let pb = self.constructive(b);
                let pc = self.constructive(c);
                let (_bt, _ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_a = self.angled(a);
                let ang_b = self.angled(b);
                let ang_c = self.angled(c);
                let fr_b = Formula::imp(ang_a.clone(), ang_b.clone());
                let fr_c = Formula::imp(ang_a.clone(), ang_c.clone());
                let horns = pb.horns.sum(&pc.horns).with(fr_b.clone()).with(fr_c.clone());
                let at = trans_t_unchecked(&self.pat.inst(a));
                let at2 = self.pat.inst_t(a);
                let ctx = horns.with(ang_a.clone()).with(at2.clone());

                let side = |piece_bwd: Proof, ang_this: &Formula, left: bool| {
                    // piece_bwd: horns_x, <X>, xt2 => xt
                    let named = mp(&FMultiset::new(), &ang_a, ang_this); // <A>, fr_X => <X>
                    let with_name = cut_replace(piece_bwd, ang_this, named);
                    let p = if left {
                        l_and1(with_name, &bt2, &ct2)
                    } else {
                        l_and2(with_name, &bt2, &ct2)
                    };
                    weaken_antecedent_to(p, &ctx)
                };
                let b_side = side(pb.backward.unwrap(), &ang_b, true);
                let c_side = side(pc.backward.unwrap(), &ang_c, false);
                let struct_p = r_and(b_side, c_side); // ctx => bt & ct
                let named_a = prove_member(&ctx, &ang_a);
                let backward = r_and(struct_p, named_a);
                debug_assert_eq!(backward.conclusion.succedent_formula(), Some(&at));
                let _ = at;

                let inst_a = self.pat.inst(a);
                let inst_b = self.pat.inst(b);
                let inst_c = self.pat.inst(c);
                self.record_sigma(&fr_b, || {
                    let base = ax_id(&FMultiset::new(), &inst_b);
                    let proj = l_and1(base, &inst_b, &inst_c);
                    r_imp(proj, &inst_a, &inst_b)
                });
                let inst_a = self.pat.inst(a);
                let inst_b = self.pat.inst(b);
                let inst_c = self.pat.inst(c);
                self.record_sigma(&fr_c, || {
                    let base = ax_id(&FMultiset::new(), &inst_c);
                    let proj = l_and2(base, &inst_b, &inst_c);
                    r_imp(proj, &inst_a, &inst_c)
                });
                Piece { horns, forward: None, backward: Some(backward) }
            }
            Node::Box(b) => {
                let pb = self.constructive(b);
                let _bt = trans_t_unchecked(&self.pat.inst(b));
                let _bt2 = self.pat.inst_t(b);
                let ang_a = self.angled(a);
                let ang_b = self.angled(b);
                let fr = Formula::imp(ang_a.clone(), Formula::boxed(ang_b.clone()));
                let horns = pb.horns.boxed().with(fr.clone());
                let at2 = self.pat.inst_t(a);
                let ctx = horns.with(ang_a.clone()).with(at2.clone());

                let kb = k_box(pb.backward.unwrap()); // box ph, box <B>, box bt2 => box bt
                let named = mp(&FMultiset::new(), &ang_a, &Formula::boxed(ang_b.clone()));
                let with_name = cut_replace(kb, &Formula::boxed(ang_b.clone()), named);
                let struct_p = weaken_antecedent_to(with_name, &ctx);
                let named_a = prove_member(&ctx, &ang_a);
                let backward = r_and(struct_p, named_a);

                self.box_sigma(&pb.horns);
                let inst_b = self.pat.inst(b);
                let inst_a = self.pat.inst(a);
                self.record_sigma(&fr, || {
                    prove_reflexive_implication(&Formula::boxed(inst_b.clone()), &FMultiset::new())
                });
                debug_assert_eq!(
                    subst_s(&fr),
                    Formula::imp(inst_a.clone(), Formula::boxed(subst_s(&ang_b)))
                );
                Piece { horns, forward: None, backward: Some(backward) }
            }
            Node::Imp(b, c) => {
                // b almost positive, c constructive
                let pb = self.almost_positive(b);
                let pc = self.constructive(c);
                let (bt, ct) = (trans_t_unchecked(&self.pat.inst(b)), trans_t_unchecked(&self.pat.inst(c)));
                let (bt2, ct2) = (self.pat.inst_t(b), self.pat.inst_t(c));
                let ang_a = self.angled(a);
                let ang_b = self.angled(b);
                let ang_c = self.angled(c);
                let fr = Formula::imp(Formula::and(ang_a.clone(), ang_b.clone()), ang_c.clone());
                let horns = pb.horns.sum(&pc.horns).with(fr.clone());
                let at = trans_t_unchecked(&self.pat.inst(a));
                let at2 = self.pat.inst_t(a);
                let ctx = horns.with(ang_a.clone()).with(at2.clone());

                // (13) pb.forward : pbh, bt => bt2 ; (14) pc.backward : pch, <C>, ct2 => ct
                let c13 = pb.horns.sum(&pc.horns).with(bt.clone()).with(ang_c.clone());
                let p13 = weaken_antecedent_to(pb.forward.unwrap(), &c13);
                let p14 = weaken_antecedent_to(pc.backward.unwrap(), &c13.with(ct2.clone()));
                let li = l_imp(p13, p14, &bt2, &ct2);
                // cut <C> against bt -> <C>
                let mp_c = mp(&FMultiset::new(), &bt, &ang_c);
                let li = cut_replace(li, &ang_c, mp_c);
                // contract the duplicated bt, then abstract it
                let base_ctx = pb
                    .horns
                    .sum(&pc.horns)
                    .with(Formula::imp(bt.clone(), ang_c.clone()))
                    .with(Formula::imp(bt2.clone(), ct2.clone()))
                    .with(bt.clone());
                let li = crate::combinator::contract_antecedent_to(li, &base_ctx);
                let p15 = r_imp(li, &bt, &ct); // (15): ... => bt -> ct

                // <A>, <A> & <B> -> <C> => <B> -> <C>
                let and_ab = Formula::and(ang_a.clone(), ang_b.clone());
                let pair = r_and(
                    prove_member(&[ang_a.clone(), ang_b.clone()].into_iter().collect(), &ang_a),
                    prove_member(&[ang_a.clone(), ang_b.clone()].into_iter().collect(), &ang_b),
                );
                let mp_fr = mp(&FMultiset::new(), &and_ab, &ang_c);
                let step1 = cut_replace(mp_fr, &and_ab, pair); // <A>, <B>, fr => <C>
                let step1 = r_imp(step1, &ang_b, &ang_c); // <A>, fr => <B> -> <C>
                // <B> -> <C> => bt -> <C>
                let lemma_b = prove_t_implies_angle(&self.pat.inst(b)).unwrap(); // {bt} => <B>
                let inner = l_imp(
                    weaken_antecedent_to(lemma_b, &FMultiset::singleton(bt.clone())),
                    ax_id(&FMultiset::singleton(bt.clone()), &ang_c),
                    &ang_b,
                    &ang_c,
                );
                let step2 = r_imp(inner, &bt, &ang_c); // {<B> -> <C>} => bt -> <C>
                let chain = cut_replace(step2, &Formula::imp(ang_b.clone(), ang_c.clone()), step1);
                // chain: <A>, fr => bt -> <C>; cut into (15)
                let full = cut_replace(p15, &Formula::imp(bt.clone(), ang_c.clone()), chain);
                let struct_p = weaken_antecedent_to(full, &ctx);
                let named_a = prove_member(&ctx, &ang_a);
                let backward = r_and(struct_p, named_a);
                debug_assert_eq!(backward.conclusion.succedent_formula(), Some(&at));

                let _inst_a = self.pat.inst(a);
                let inst_b = self.pat.inst(b);
                let inst_c = self.pat.inst(c);
                self.record_sigma(&fr, || {
                    // => (A & B) -> C where A = B -> C
                    let inner = mp(&FMultiset::new(), &inst_b, &inst_c);
                    let collapsed = crate::combinator::collapse_antecedent(
                        inner,
                        &[Formula::imp(inst_b.clone(), inst_c.clone()), inst_b.clone()],
                    );
                    let body = Formula::and(Formula::imp(inst_b.clone(), inst_c.clone()), inst_b.clone());
                    r_imp(collapsed, &body, &inst_c)
                });
                Piece { horns, forward: None, backward: Some(backward) }
            }
            Node::Or(..) | Node::Dia(..) => {
                unreachable!("non-basic disjunction-like patterns are rejected before recursion")
            }
            _ => unreachable!("atoms are basic"),
        }
    }

    fn box_sigma(&mut self, horns: &FMultiset) {
        for (horn, _) in horns.iter() {
            if let Some(sub) = self.sigma_parts.get(horn).cloned() {
                let boxed_horn = Formula::boxed(horn.clone());
                self.record_sigma(&boxed_horn, || k_box(sub));
            }
        }
    }
}

/// The commutation construction: given a pattern in the named class, a
/// designated-argument map (pattern atom -> plain-modal argument), produces
/// the Horn set with the clause's provable direction(s) and the sigma proof
/// `=> /\ horns^s`. Pattern atoms without an entry are their own arguments.
pub fn commute(
    class: CommuteClass,
    pattern: &Formula,
    args: &BTreeMap<Formula, Formula>,
) -> Result<CommutationResult> {
    if pattern.contains_angled() {
        return Err(Error::AngledAtomPresent);
    }
    for (k, v) in args {
        if !k.is_atomic() || v.contains_angled() {
            return Err(Error::AngledAtomPresent);
        }
    }
    let mut memo = ClassMemo::new();
    if !memo.holds(class.formula_class(), pattern) {
        return Err(Error::WrongClass {
            class: format!("{:?}", class.formula_class()),
            formula: pattern.to_string(),
        });
    }
    let mut cm = Commute { pat: Pattern { args }, memo, sigma_parts: BTreeMap::new() };
    let piece = match class {
        CommuteClass::Basic => cm.basic(pattern),
        CommuteClass::AlmostPositive => cm.almost_positive(pattern),
        CommuteClass::Constructive => cm.constructive(pattern),
    };
    let sigma = assemble_sigma(&piece.horns, &cm.sigma_parts);
    Ok(CommutationResult {
        horns: piece.horns,
        forward: piece.forward,
        backward: piece.backward,
        sigma,
        sigma_parts: cm.sigma_parts,
    })
}

/// Folds per-member `=> e^s` proofs into `=> /\ horns^s`, following the
/// canonical order of the substituted multiset `horns^s`.
pub(crate) fn assemble_sigma(horns: &FMultiset, parts: &BTreeMap<Formula, Proof>) -> Proof {
    let mut keyed: Vec<(Formula, &Formula)> =
        horns.iter_flat().map(|h| (subst_s(h), h)).collect();
    keyed.sort();
    let proofs: Vec<Proof> = keyed
        .into_iter()
        .map(|(_, h)| parts.get(h).unwrap_or_else(|| panic!("missing sigma part for {h}")).clone())
        .collect();
    fold_r_and(&FMultiset::new(), proofs)
}

/// Harrop decomposition: `gamma` of modal Horn formulas over angled atoms
/// with `CK |- gamma => A^t` and both directions of `/\ gamma^s <=> A`.
pub struct HarropDecomposition {
    pub gamma: FMultiset,
    pub derivation: Proof,
    /// `/\ gamma^s => A`
    pub equiv_to: Proof,
    /// `A => e^s` per member, foldable into `A => /\ gamma^s`
    pub member_proofs: BTreeMap<Formula, Proof>,
}

impl HarropDecomposition {
    /// `A => /\ gamma^s`
    pub fn equiv_from(&self) -> Proof {
        let ctx = self.equiv_from_parts().0;
        let proofs = self.equiv_from_parts().1;
        fold_r_and(&ctx, proofs)
    }

    fn equiv_from_parts(&self) -> (FMultiset, Vec<Proof>) {
        let a = self.equiv_to.conclusion.succedent_formula().unwrap();
        let ctx = FMultiset::singleton(a.clone());
        let mut key_by_s: BTreeMap<Formula, Vec<&Formula>> = BTreeMap::new();
        for g in self.gamma.iter_flat() {
            key_by_s.entry(subst_s(g)).or_default().push(g);
        }
        let mut proofs = Vec::new();
        for (_, gs) in key_by_s {
            for g in gs {
                proofs.push(self.member_proofs.get(g).unwrap().clone());
            }
        }
        (ctx, proofs)
    }
}

/// Decomposes a Harrop formula per the structural recursion; see the
/// module docs. Errors on non-Harrop input.
pub fn harrop_decompose(a: &Formula) -> Result<HarropDecomposition> {
    if a.contains_angled() {
        return Err(Error::AngledAtomPresent);
    }
    if !crate::classify::is_harrop(a) {
        return Err(Error::NotHarrop(a.to_string()));
    }
    Ok(harrop_rec(a))
}

fn harrop_rec(a: &Formula) -> HarropDecomposition {
    let angled = |f: &Formula| Formula::angled(f.clone()).expect("plain payload");
    match a.node() {
        Node::Atom(_) | Node::Top | Node::Bot => {
            let at = trans_t_unchecked(a);
            let gamma = FMultiset::singleton(at.clone());
            let derivation = ax_id(&FMultiset::new(), &at);
            // /\ {A^t}^s = A for atoms and top; bot^t = bot
            let equiv_to = ax_id(&FMultiset::new(), a);
            let mut member_proofs = BTreeMap::new();
            member_proofs.insert(at, ax_id(&FMultiset::new(), a));
            HarropDecomposition { gamma, derivation, equiv_to, member_proofs }
        }
        Node::And(b, c) => {
            let db = harrop_rec(b);
            let dc = harrop_rec(c);
            let ang = angled(a);
            let gamma = db.gamma.sum(&dc.gamma).with(ang.clone());
            let (bt, ct) = (trans_t_unchecked(b), trans_t_unchecked(c));
            // derivation: gamma => (B^t & C^t) & <B & C>
            let pb = weaken_antecedent_to(db.derivation, &gamma);
            let pc = weaken_antecedent_to(dc.derivation, &gamma);
            let struct_p = r_and(pb, pc);
            let named = prove_member(&gamma, &ang);
            let derivation = r_and(struct_p, named);
            debug_assert_eq!(derivation.conclusion.succedent_formula(), Some(&trans_t_unchecked(a)));
            let _ = (bt, ct);
            // equiv_to: /\ gamma^s => A by projecting the member <B & C>^s = A
            let members_s: Vec<Formula> = gamma.map(subst_s).to_vec();
            let idx = members_s.iter().position(|m| m == a).expect("self member");
            let equiv_to = crate::combinator::proj_member(&members_s, idx);
            // member proofs: A => e^s
            let mut member_proofs = BTreeMap::new();
            for (m, p) in db.member_proofs {
                member_proofs.entry(m).or_insert_with(|| l_and1(p, b, c));
            }
            for (m, p) in dc.member_proofs {
                member_proofs.entry(m).or_insert_with(|| l_and2(p, b, c));
            }
            member_proofs.entry(ang).or_insert_with(|| ax_id(&FMultiset::new(), a));
            HarropDecomposition { gamma, derivation, equiv_to, member_proofs }
        }
        Node::Imp(b, c) => {
            let dc = harrop_rec(c);
            let ang_a = angled(a);
            let ang_b = angled(b);
            let gamma: FMultiset = std::iter::once(ang_a.clone())
                .chain(dc.gamma.iter_flat().map(|g| Formula::imp(ang_b.clone(), g.clone())))
                .collect();
            let (bt, ct) = (trans_t_unchecked(b), trans_t_unchecked(c));
            // derivation: {<B -> C>} u {<B> -> g} => (B^t -> C^t) & <B -> C>
            // inner: {<B> -> g}_g, B^t => C^t
            let dgc_members: Vec<Formula> = dc.gamma.iter_flat().cloned().collect();
            let imp_members: FMultiset =
                dgc_members.iter().map(|g| Formula::imp(ang_b.clone(), g.clone())).collect();
            let ctx_imp = imp_members.with(ang_b.clone());
            let to_conj = prove_big_and_with(&ctx_imp, &dgc_members, |g| {
                let m = mp(&FMultiset::new(), &ang_b, g);
                weaken_antecedent_to(
                    crate::combinator::contract_antecedent_to(m.clone(), &m.conclusion.antecedent.clone()),
                    &ctx_imp,
                )
            }); // {<B> -> g}_g, <B> => /\ dc.gamma
            let dcol = crate::combinator::collapse_antecedent(
                dc.derivation,
                &dgc_members,
            ); // {/\ dc.gamma} => C^t
            let conj = crate::formula::big_and_list(&dgc_members);
            let chained = cut(
                to_conj,
                weaken_antecedent_to(dcol, &ctx_imp.with(conj.clone())),
                &conj,
            ); // {<B> -> g}_g, <B> => C^t
            // replace <B> by B^t via the lemma
            let lemma = prove_t_implies_angle(b).unwrap(); // {B^t} => <B>
            let inner = cut_replace(chained, &ang_b, lemma); // {<B> -> g}_g, B^t => C^t
            let imp_part = r_imp(inner, &bt, &ct);
            let imp_part = weaken_antecedent_to(imp_part, &gamma);
            let named = prove_member(&gamma, &ang_a);
            let derivation = r_and(imp_part, named);
            debug_assert_eq!(derivation.conclusion.succedent_formula(), Some(&trans_t_unchecked(a)));

            let members_s: Vec<Formula> = gamma.map(subst_s).to_vec();
            let idx = members_s.iter().position(|m| m == a).expect("self member");
            let equiv_to = crate::combinator::proj_member(&members_s, idx);

            let mut member_proofs = BTreeMap::new();
            member_proofs.insert(ang_a, ax_id(&FMultiset::new(), a));
            for (m, p) in dc.member_proofs {
                // A = B -> C proves B -> m^s from C => m^s
                let key = Formula::imp(ang_b.clone(), m.clone());
                member_proofs.entry(key).or_insert_with(|| {
                    let ms = subst_s(&m);
                    let inner = mp(&FMultiset::new(), b, c); // b, b -> c => c
                    let chained = cut(
                        inner,
                        weaken_antecedent_to(p, &[b.clone(), a.clone(), c.clone()].into_iter().collect()),
                        c,
                    ); // b, b -> c => m^s
                    r_imp(chained, b, &ms)
                });
            }
            HarropDecomposition { gamma, derivation, equiv_to, member_proofs }
        }
        Node::Box(b) => {
            let db = harrop_rec(b);
            let ang_a = angled(a);
            let gamma = db.gamma.boxed().with(ang_a.clone());
            let bt = trans_t_unchecked(b);
            let kb = k_box(db.derivation); // box db.gamma => box B^t
            let kb = weaken_antecedent_to(kb, &gamma);
            let named = prove_member(&gamma, &ang_a);
            let derivation = r_and(kb, named);
            debug_assert_eq!(derivation.conclusion.succedent_formula(), Some(&trans_t_unchecked(a)));
            let _ = bt;

            let members_s: Vec<Formula> = gamma.map(subst_s).to_vec();
            let idx = members_s.iter().position(|m| m == a).expect("self member");
            let equiv_to = crate::combinator::proj_member(&members_s, idx);

            let mut member_proofs = BTreeMap::new();
            member_proofs.insert(ang_a, ax_id(&FMultiset::new(), a));
            for (m, p) in db.member_proofs {
                let key = Formula::boxed(m);
                member_proofs.entry(key).or_insert_with(|| k_box(p));
            }
            HarropDecomposition { gamma, derivation, equiv_to, member_proofs }
        }
        Node::Or(..) | Node::Dia(..) | Node::Angled(_) => unreachable!("Harrop checked"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::classify::{is_modal_horn, ClassMemo};
    use crate::parse::parse_formula;
    use crate::proof::check_proof;

    fn f(text: &str) -> Formula {
        parse_formula(text, crate::formula::LanguageTag::FullPlus).unwrap()
    }

    fn ck_valid(p: &Proof) {
        let ck = builtin("CK").unwrap();
        let v = check_proof(&ck, p, &[]);
        assert!(v.is_valid(), "{v}\n  concluding {}", p.conclusion);
    }

    #[test]
    fn translation_examples() {
        assert_eq!(trans_t(&f("p")).unwrap(), f("<p>"));
        assert_eq!(trans_t(&f("bot")).unwrap(), f("bot"));
        assert_eq!(trans_t(&f("top")).unwrap(), f("<top>"));
        assert_eq!(trans_t(&f("p & q")).unwrap(), f("(<p> & <q>) & <p & q>"));
        assert_eq!(
            trans_t(&f("box p")).unwrap(),
            Formula::and(Formula::boxed(f("<p>")), f("<box p>"))
        );
        assert!(trans_t(&f("<p>")).is_err());
    }

    #[test]
    fn standard_substitution_examples() {
        assert_eq!(subst_s(&f("<p & q>")), f("p & q"));
        assert_eq!(subst_s(&f("p")), f("p"));
        let st = subst_s(&trans_t(&f("box p")).unwrap());
        assert_eq!(st, f("box p & box p"));
        // s . t on atoms unwraps to the identity
        assert_eq!(subst_s(&trans_t(&f("q")).unwrap()), f("q"));
    }

    #[test]
    fn size_bound_t() {
        // |A^t| is O(|A|^2): crude check on a doubling ladder
        for n in [4usize, 8, 16, 32] {
            let mut a = f("p");
            for _ in 0..n {
                a = Formula::and(a, f("p"));
            }
            let t = trans_t(&a).unwrap();
            assert!(t.size() <= 4 * a.size() * a.size());
        }
    }

    #[test]
    fn t_implies_angle_checks() {
        for text in ["p", "top", "bot", "p & q", "box (p -> q)", "dia p | ~q"] {
            let a = f(text);
            let p = prove_t_implies_angle(&a).unwrap();
            ck_valid(&p);
            if text != "bot" {
                assert_eq!(
                    p.conclusion,
                    Sequent::to(
                        FMultiset::singleton(trans_t(&a).unwrap()),
                        Formula::angled(a).unwrap()
                    )
                );
            }
        }
    }

    #[test]
    fn st_equivalence_checks() {
        for text in ["p", "top", "bot", "p & q", "p | q", "p -> q", "box p", "dia p",
            "box (p -> q) & dia (p | ~r)", "~~p", "(p -> q) -> r"]
        {
            let a = f(text);
            let (fwd, bwd) = prove_st_equivalence(&a).unwrap();
            ck_valid(&fwd);
            ck_valid(&bwd);
            let st = subst_s(&trans_t(&a).unwrap());
            assert_eq!(fwd.conclusion, Sequent::to(FMultiset::singleton(st.clone()), a.clone()));
            assert_eq!(bwd.conclusion, Sequent::to(FMultiset::singleton(a), st));
        }
    }

    fn args_for(pattern: &Formula, mapping: &[(&str, &str)]) -> BTreeMap<Formula, Formula> {
        let _ = pattern;
        mapping.iter().map(|(k, v)| (f(k), f(v))).collect()
    }

    fn check_commute(class: CommuteClass, pattern: &str, mapping: &[(&str, &str)]) {
        let pat = f(pattern);
        let args = args_for(&pat, mapping);
        let res = commute(class, &pat, &args).unwrap();
        // all horns are modal Horn over angled atoms only
        let mut memo = ClassMemo::new();
        for h in res.horns.iter_flat() {
            assert!(memo.modal_horn(h), "{h} not modal Horn");
            for at in h.atoms() {
                assert!(
                    matches!(at.node(), Node::Angled(_)),
                    "horn member {h} contains named atom {at}"
                );
            }
        }
        ck_valid(&res.sigma);
        let s_horns = res.horns.map(subst_s);
        assert_eq!(res.sigma.conclusion, Sequent::concl(s_horns.big_and()));
        let pt = Pattern { args: &args };
        let at = trans_t(&pt.inst(&pat)).unwrap();
        let at2 = pt.inst_t(&pat);
        match class {
            CommuteClass::Basic => {
                let fwd = res.forward.as_ref().unwrap();
                let bwd = res.backward.as_ref().unwrap();
                ck_valid(fwd);
                ck_valid(bwd);
                assert_eq!(fwd.conclusion, Sequent::to(res.horns.with(at.clone()), at2.clone()));
                assert_eq!(bwd.conclusion, Sequent::to(res.horns.with(at2), at));
            }
            CommuteClass::AlmostPositive => {
                let fwd = res.forward.as_ref().unwrap();
                ck_valid(fwd);
                assert!(res.backward.is_none());
                assert_eq!(fwd.conclusion, Sequent::to(res.horns.with(at), at2));
            }
            CommuteClass::Constructive => {
                let bwd = res.backward.as_ref().unwrap();
                ck_valid(bwd);
                let ang = Formula::angled(pt.inst(&pat)).unwrap();
                assert_eq!(
                    bwd.conclusion,
                    Sequent::to(res.horns.with(ang).with(at2), at)
                );
            }
        }
    }

    #[test]
    fn commute_basic_cases() {
        check_commute(CommuteClass::Basic, "top", &[]);
        check_commute(CommuteClass::Basic, "bot", &[]);
        check_commute(CommuteClass::Basic, "p", &[("p", "box q -> r")]);
        check_commute(CommuteClass::Basic, "p & q", &[("p", "r | s"), ("q", "box u")]);
        check_commute(CommuteClass::Basic, "p | q", &[("p", "~r"), ("q", "q")]);
        check_commute(CommuteClass::Basic, "dia (p & q)", &[("p", "r -> s"), ("q", "top")]);
        check_commute(CommuteClass::Basic, "dia p | (q & top)", &[("p", "box r"), ("q", "u")]);
        // paper: Phi for top is {<top>}, for atoms empty
        let res = commute(CommuteClass::Basic, &f("top"), &BTreeMap::new()).unwrap();
        assert_eq!(res.horns, FMultiset::singleton(f("<top>")));
        let res = commute(CommuteClass::Basic, &f("p"), &BTreeMap::new()).unwrap();
        assert!(res.horns.is_empty());
        // conjunction adds the F implication
        let res = commute(
            CommuteClass::Basic,
            &f("p & q"),
            &args_for(&f("p & q"), &[("p", "a"), ("q", "b")]),
        )
        .unwrap();
        assert!(res.horns.contains(&f("<a> & <b> -> <a & b>")));
    }

    #[test]
    fn commute_almost_positive_cases() {
        check_commute(CommuteClass::AlmostPositive, "~p", &[("p", "q & r")]);
        check_commute(CommuteClass::AlmostPositive, "box p", &[("p", "q -> r")]);
        check_commute(CommuteClass::AlmostPositive, "dia box p", &[("p", "q")]);
        check_commute(CommuteClass::AlmostPositive, "p -> q | r", &[("p", "a"), ("q", "b"), ("r", "~c")]);
        check_commute(CommuteClass::AlmostPositive, "box (p | q) & dia r", &[("p", "a -> b"), ("r", "c")]);
        check_commute(CommuteClass::AlmostPositive, "p | ~p", &[("p", "box a")]);
    }

    #[test]
    fn commute_constructive_cases() {
        check_commute(CommuteClass::Constructive, "~~p", &[("p", "q")]);
        check_commute(CommuteClass::Constructive, "(p -> q) -> r", &[("p", "a"), ("q", "b"), ("r", "c & d")]);
        check_commute(CommuteClass::Constructive, "box (p -> q)", &[("p", "a | b"), ("q", "c")]);
        check_commute(CommuteClass::Constructive, "box p & (q -> r)", &[("p", "a"), ("q", "b"), ("r", "c")]);
        // basic formulas are constructive; positive disjunction allowed there
        check_commute(CommuteClass::Constructive, "p | q", &[("p", "a"), ("q", "b")]);
        // wrong class errors
        assert!(matches!(
            commute(CommuteClass::Constructive, &f("p | ~p"), &BTreeMap::new()),
            Err(Error::WrongClass { .. })
        ));
        assert!(matches!(
            commute(CommuteClass::Basic, &f("box p"), &BTreeMap::new()),
            Err(Error::WrongClass { .. })
        ));
    }

    #[test]
    fn harrop_examples() {
        // atoms
        let d = harrop_decompose(&f("p")).unwrap();
        assert_eq!(d.gamma, FMultiset::singleton(f("<p>")));
        ck_valid(&d.derivation);
        ck_valid(&d.equiv_to);
        ck_valid(&d.equiv_from());
        // B -> q
        let d = harrop_decompose(&f("(a | b) -> q")).unwrap();
        assert_eq!(
            d.gamma,
            [f("<(a | b) -> q>"), f("<a | b> -> <q>")].into_iter().collect::<FMultiset>()
        );
        ck_valid(&d.derivation);
        // box p
        let d = harrop_decompose(&f("box p")).unwrap();
        assert_eq!(
            d.gamma,
            [Formula::boxed(f("<p>")), f("<box p>")].into_iter().collect::<FMultiset>()
        );
        ck_valid(&d.derivation);
        ck_valid(&d.equiv_to);
        ck_valid(&d.equiv_from());
        // everything in one: nested Harrop
        for text in ["(p | dia q) -> box (r & s)", "box (p -> q & top) & ~r", "bot", "top"] {
            let a = f(text);
            let d = harrop_decompose(&a).unwrap();
            let mut memo = ClassMemo::new();
            for g in d.gamma.iter_flat() {
                assert!(memo.modal_horn(g), "{g}");
                for at in g.atoms() {
                    assert!(matches!(at.node(), Node::Angled(_)), "{g} has named atom");
                }
            }
            ck_valid(&d.derivation);
            assert_eq!(
                d.derivation.conclusion,
                Sequent::to(d.gamma.clone(), trans_t(&a).unwrap())
            );
            ck_valid(&d.equiv_to);
            let from = d.equiv_from();
            ck_valid(&from);
            assert_eq!(
                from.conclusion,
                Sequent::to(FMultiset::singleton(a.clone()), d.gamma.map(subst_s).big_and())
            );
            assert_eq!(
                d.equiv_to.conclusion,
                Sequent::to(FMultiset::singleton(d.gamma.map(subst_s).big_and()), a)
            );
        }
        assert!(matches!(harrop_decompose(&f("p | q")), Err(Error::NotHarrop(_))));
        assert!(is_modal_horn(&f("<a>")));
    }
}
