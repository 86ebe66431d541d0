//! Proof-producing unit propagation over implicational Horn sequents,
//! modal-Horn flattening, and the T-free/T-full reduction to classically
//! valid implicational Horn sequents.

use std::collections::VecDeque;

use crate::calculus::Calculus;
use crate::combinator::{
    ax_id, ax_l_bot, collapse_antecedent, contract_antecedent_to, cut, cut_replace, fold_r_and,
    l_imp, mp, proj_member, proj_path, prove_big_and_with, prove_member, r_and, r_imp,
    weaken_antecedent_to, weaken_left_one,
};
use crate::error::{Error, Result};
use crate::formula::{big_and_list, FMultiset, Formula, Node, Sequent};
use crate::proof::Proof;
use crate::semantics::{matches_t_a, matches_t_b};
use crate::translate::subst_s;

fn is_atom(f: &Formula) -> bool {
    matches!(f.node(), Node::Atom(_) | Node::Angled(_))
}

fn is_bot(f: &Formula) -> bool {
    matches!(f.node(), Node::Bot)
}

fn conj_leaves(f: &Formula, out: &mut Vec<Formula>) {
    match f.node() {
        Node::And(a, b) => {
            conj_leaves(a, out);
            conj_leaves(b, out);
        }
        _ => out.push(f.clone()),
    }
}

/// A non-unit clause in the working state.
#[derive(Clone, Debug)]
struct Clause {
    /// current formula, a member of the stage multiset
    formula: Formula,
    /// original body tree of `formula`
    body_tree: Formula,
    /// flattened body leaves, left to right
    body: Vec<Formula>,
    head: Formula,
}

impl Clause {
    fn parse(f: &Formula) -> Option<Clause> {
        match f.node() {
            Node::Imp(body, head) if is_atom(head) || is_bot(head) => {
                let mut leaves = Vec::new();
                conj_leaves(body, &mut leaves);
                if leaves.iter().all(is_atom) {
                    Some(Clause {
                        formula: f.clone(),
                        body_tree: body.clone(),
                        body: leaves,
                        head: head.clone(),
                    })
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Ordered propagation state: the unit queue `V`, the processed units `W`,
/// and the remaining non-unit clauses `T`. No member of `W` occurs in any
/// clause of `T` once a unit has been fully resolved.
#[derive(Debug)]
pub struct HornState {
    pub v: VecDeque<Formula>,
    pub w: Vec<Formula>,
    t: Vec<Clause>,
}

impl HornState {
    fn stage_multiset(&self) -> FMultiset {
        self.v
            .iter()
            .cloned()
            .chain(self.w.iter().cloned())
            .chain(self.t.iter().map(|c| c.formula.clone()))
            .collect()
    }
}

/// Outcome of unit propagation.
pub enum UnitPropOutcome {
    /// A target (0-based index) with an LJ-proof of `Gamma => target`.
    Found { index: usize, proof: Proof },
    /// The sequent is classically invalid; the valuation making exactly
    /// these atoms true satisfies `Gamma` and falsifies every target.
    NotValid { true_atoms: Vec<Formula> },
}

/// Lemma `u, phi => psi` for one resolution step, where `phi` has body
/// leaves `body` (tree `body_tree`), head `head`, and `psi` is the residual
/// clause (`None` body means the bare head unit).
fn resolve_lemma(u: &Formula, clause: &Clause, residual_body: &[Formula]) -> Proof {
    let residual_conj = big_and_list(residual_body);
    let ctx: FMultiset = if residual_body.is_empty() {
        FMultiset::singleton(u.clone())
    } else {
        [u.clone(), residual_conj.clone()].into_iter().collect()
    };
    // ctx => original body tree
    fn tree_proof(tree: &Formula, ctx: &FMultiset, u: &Formula, residual: &[Formula]) -> Proof {
        match tree.node() {
            Node::And(a, b) => r_and(
                tree_proof(a, ctx, u, residual),
                tree_proof(b, ctx, u, residual),
            ),
            _ => {
                if tree == u {
                    prove_member(ctx, u)
                } else {
                    let idx = residual.iter().position(|m| m == tree).expect("residual leaf");
                    let p = proj_member(residual, idx);
                    weaken_antecedent_to(p, ctx)
                }
            }
        }
    }
    let premise1 = tree_proof(&clause.body_tree, &ctx, u, residual_body);
    let premise2 = ax_id(&ctx, &clause.head);
    let applied = l_imp(premise1, premise2, &clause.body_tree, &clause.head);
    if residual_body.is_empty() {
        applied // u, phi => head
    } else {
        r_imp(applied, &residual_conj, &clause.head) // u, phi => /\residual -> head
    }
}

/// One stage-transition proof `{ /\Gamma_k } => /\Gamma_{k+1}` where the
/// transition consumed `phi` (using unit `u`) and added `new_member`.
fn stage_proof(
    gamma_k: &FMultiset,
    gamma_next: &FMultiset,
    u: &Formula,
    clause: &Clause,
    new_member: Option<(&Formula, &[Formula])>,
) -> Proof {
    let members_k: Vec<Formula> = gamma_k.to_vec();
    let conj_k = big_and_list(&members_k);
    let ctx = FMultiset::singleton(conj_k.clone());
    let proofs: Vec<Proof> = gamma_next
        .iter_flat()
        .map(|x| {
            let fresh = match new_member {
                Some((m, _)) if m == x && gamma_k.count(x) < gamma_next.count(x) => true,
                _ => false,
            };
            if !fresh && gamma_k.contains(x) {
                let idx = members_k.iter().position(|m| m == x).unwrap();
                proj_member(&members_k, idx)
            } else {
                let (_m, residual) = new_member.expect("new member needed");
                let lemma = resolve_lemma(u, clause, residual); // u, phi => x
                let pu = proj_member(&members_k, members_k.iter().position(|m| m == u).unwrap());
                let pphi = proj_member(
                    &members_k,
                    members_k.iter().position(|m| *m == clause.formula).unwrap(),
                );
                let step = cut_replace(lemma, u, pu);
                let step = cut_replace(step, &clause.formula, pphi);
                contract_antecedent_to(step, &ctx)
            }
        })
        .collect();
    fold_r_and(&ctx, proofs)
}

/// Unit propagation with proof trace. Reads a multiset of implicational
/// Horn formulas and ordered atomic targets; if some `Gamma => target_i` is
/// derivable the first one found is returned with a checked LJ-proof,
/// otherwise the terminal valuation is a countermodel for
/// `Gamma => \/ targets`.
///
/// Unit selection is FIFO; clause scanning is left-to-right; `bot` halts
/// with the first target.
pub fn unit_propagate(gamma: &FMultiset, targets: &[Formula]) -> Result<UnitPropOutcome> {
    for t in targets {
        if !is_atom(t) {
            return Err(Error::NotHorn(format!("target {t} is not an atom")));
        }
    }
    let mut v: VecDeque<Formula> = VecDeque::new();
    let mut t_clauses: Vec<Clause> = Vec::new();
    for f in gamma.iter_flat() {
        if is_atom(f) || is_bot(f) {
            v.push_back(f.clone());
        } else if let Some(c) = Clause::parse(f) {
            t_clauses.push(c);
        } else {
            return Err(Error::NotHorn(f.to_string()));
        }
    }
    let mut state = HornState { v, w: Vec::new(), t: t_clauses };
    // (stage multiset before, transition proof) chain
    let mut chain: Vec<Proof> = Vec::new();
    let mut gamma_cur = state.stage_multiset();
    debug_assert_eq!(&gamma_cur, gamma);

    let found = 'outer: loop {
        let Some(u) = state.v.front().cloned() else {
            break None;
        };
        if is_bot(&u) {
            break Some((0usize, u));
        }
        if let Some(i) = targets.iter().position(|t| *t == u) {
            break Some((i, u));
        }
        // scan T left to right, resolving u against every clause
        let mut resolved_any = false;
        let mut idx = 0;
        while idx < state.t.len() {
            let clause = state.t[idx].clone();
            if clause.head == u {
                // delete phi
                state.t.remove(idx);
                resolved_any = true;
                let gamma_next = gamma_cur.without(&clause.formula);
                chain.push(stage_proof(&gamma_cur, &gamma_next, &u, &clause, None));
                gamma_cur = gamma_next;
                continue;
            }
            if clause.body.iter().any(|b| *b == u) {
                state.t.remove(idx);
                resolved_any = true;
                let residual: Vec<Formula> =
                    clause.body.iter().filter(|b| **b != u).cloned().collect();
                let gamma_next;
                if residual.is_empty() {
                    // all body atoms were u: the head becomes a unit
                    gamma_next = gamma_cur.without(&clause.formula).with(clause.head.clone());
                    chain.push(stage_proof(
                        &gamma_cur,
                        &gamma_next,
                        &u,
                        &clause,
                        Some((&clause.head, &residual)),
                    ));
                    if is_bot(&clause.head) {
                        // a derived bot halts at the next queue inspection
                        state.v.push_back(clause.head.clone());
                    } else {
                        state.v.push_back(clause.head.clone());
                    }
                } else {
                    let new_formula = Formula::imp(big_and_list(&residual), clause.head.clone());
                    gamma_next = gamma_cur.without(&clause.formula).with(new_formula.clone());
                    chain.push(stage_proof(
                        &gamma_cur,
                        &gamma_next,
                        &u,
                        &clause,
                        Some((&new_formula, &residual)),
                    ));
                    let mut leaves = Vec::new();
                    conj_leaves(&big_and_list(&residual), &mut leaves);
                    state.t.push(Clause {
                        formula: new_formula,
                        body_tree: big_and_list(&residual),
                        body: leaves,
                        head: clause.head.clone(),
                    });
                }
                gamma_cur = gamma_next;
                continue;
            }
            idx += 1;
        }
        if !resolved_any {
            state.v.pop_front();
            state.w.push(u);
        }
        // targets may have appeared at the front; loop re-inspects
        continue 'outer;
    };

    match found {
        None => Ok(UnitPropOutcome::NotValid { true_atoms: state.w }),
        Some((index, u)) => {
            let target = &targets[index];
            // Gamma_N => target
            let d_n = if is_bot(&u) {
                ax_l_bot(&gamma_cur.without(&u), &FMultiset::singleton(target.clone()))
            } else {
                ax_id(&gamma_cur.without(&u), &u)
            };
            // assemble: Gamma_0 => /\Gamma_0 => ... => /\Gamma_N, then cut
            let proof = if chain.is_empty() {
                d_n
            } else {
                let members0: Vec<Formula> = gamma.to_vec();
                let mut cur = prove_big_and_with(gamma, &members0, |m| prove_member(gamma, m));
                for step in chain {
                    let conj_k = cur.conclusion.succedent_formula().unwrap().clone();
                    let step = weaken_antecedent_to(step, &gamma.with(conj_k.clone()));
                    cur = cut(cur, step, &conj_k);
                }
                let conj_n = cur.conclusion.succedent_formula().unwrap().clone();
                let members_n: Vec<Formula> = gamma_cur.to_vec();
                let dd = collapse_antecedent(d_n, &members_n);
                debug_assert_eq!(
                    dd.conclusion.antecedent,
                    FMultiset::singleton(conj_n.clone())
                );
                let dd = weaken_antecedent_to(dd, &gamma.with(conj_n.clone()));
                cut(cur, dd, &conj_n)
            };
            debug_assert_eq!(proof.conclusion, Sequent::to(gamma.clone(), target.clone()));
            Ok(UnitPropOutcome::Found { index, proof })
        }
    }
}

/// Both directions of an LJ equivalence.
pub struct Equivalence {
    /// `{a} => b`
    pub lr: Proof,
    /// `{b} => a`
    pub rl: Proof,
}

/// Collapses a modality-free modal Horn formula
/// `/\r1 -> (/\r2 -> (... -> s))` to the implicational Horn
/// `/\(r1 u ... u rm) -> s`, with LJ-proofs both ways. Atoms and `bot` are
/// fixed points with identity proofs.
pub fn flatten_modal_horn(f: &Formula) -> Result<(Formula, Equivalence)> {
    if !crate::classify::is_modal_horn(f) || !modality_free(f) {
        return Err(Error::NotModalityFreeHorn(f.to_string()));
    }
    // peel nested implications
    let mut levels: Vec<(Formula, Vec<Formula>)> = Vec::new(); // (body tree, leaves)
    let mut rest = f.clone();
    while let Node::Imp(body, tail) = rest.node() {
        let mut leaves = Vec::new();
        conj_leaves(body, &mut leaves);
        levels.push((body.clone(), leaves));
        rest = tail.clone();
    }
    let head = rest;
    if levels.is_empty() {
        let id = ax_id(&FMultiset::new(), f);
        let id2 = ax_id(&FMultiset::new(), f);
        return Ok((f.clone(), Equivalence { lr: id, rl: id2 }));
    }
    let all_atoms: Vec<Formula> = levels.iter().flat_map(|(_, ls)| ls.iter().cloned()).collect();
    let flat_body = big_and_list(&all_atoms);
    let flat = Formula::imp(flat_body.clone(), head.clone());

    // lr: {f} => flat
    let ctx = FMultiset::singleton(flat_body.clone());
    let mut rests: Vec<Formula> = vec![head.clone()];
    for (body, _) in levels.iter().rev() {
        let prev = rests.last().unwrap().clone();
        rests.push(Formula::imp(body.clone(), prev));
    }
    // rests[k] = nesting from level (m-k); rests[m] = f
    debug_assert_eq!(rests.last().unwrap(), f);
    let mut cur = ax_id(&ctx, &head);
    for (k, (body_tree, _)) in levels.iter().enumerate().rev() {
        // premise1: ctx => body_tree via projections from the flat body
        fn tree_from_flat(tree: &Formula, flat_atoms: &[Formula], ctx: &FMultiset) -> Proof {
            match tree.node() {
                Node::And(a, b) => r_and(
                    tree_from_flat(a, flat_atoms, ctx),
                    tree_from_flat(b, flat_atoms, ctx),
                ),
                _ => {
                    let idx = flat_atoms.iter().position(|m| m == tree).unwrap();
                    weaken_antecedent_to(proj_member(flat_atoms, idx), ctx)
                }
            }
        }
        let premise1 = tree_from_flat(body_tree, &all_atoms, &ctx);
        let rest_k = rests[levels.len() - 1 - k].clone();
        cur = l_imp(premise1, cur, body_tree, &rest_k);
    }
    // cur: {flat_body, f} => head
    let lr = {
        let p = r_imp(cur, &flat_body, &head);
        debug_assert_eq!(p.conclusion, Sequent::to(FMultiset::singleton(f.clone()), flat.clone()));
        p
    };

    // rl: {flat} => f
    let body_formulas: Vec<Formula> = levels.iter().map(|(b, _)| b.clone()).collect();
    let ctx2: FMultiset =
        std::iter::once(flat.clone()).chain(body_formulas.iter().cloned()).collect();
    // ctx2 => each atom, via the body tree containing it
    let fold = prove_big_and_with(&ctx2, &all_atoms, |atom| {
        let (tree, _) = levels
            .iter()
            .find(|(_, leaves)| leaves.iter().any(|l| l == atom))
            .expect("atom belongs to some level");
        // find path of atom inside tree
        fn find_path(tree: &Formula, atom: &Formula, path: &mut Vec<bool>) -> bool {
            match tree.node() {
                Node::And(a, b) => {
                    path.push(true);
                    if find_path(a, atom, path) {
                        return true;
                    }
                    path.pop();
                    path.push(false);
                    if find_path(b, atom, path) {
                        return true;
                    }
                    path.pop();
                    false
                }
                _ => tree == atom,
            }
        }
        let mut path = Vec::new();
        let ok = find_path(tree, atom, &mut path);
        debug_assert!(ok);
        weaken_antecedent_to(proj_path(tree, &path), &ctx2)
    });
    let mp_p = mp(&FMultiset::new(), &flat_body, &head);
    let step = cut_replace(mp_p, &flat_body, fold); // {flat} + ctx2 => head
    let mut cur = contract_antecedent_to(step, &ctx2);
    for body in body_formulas.iter().rev() {
        let target_head = cur.conclusion.succedent_formula().unwrap().clone();
        cur = r_imp(cur, body, &target_head);
    }
    debug_assert_eq!(cur.conclusion, Sequent::to(FMultiset::singleton(flat.clone()), f.clone()));
    Ok((flat, Equivalence { lr, rl: cur }))
}

/// Erases every box and diamond; angled atoms are opaque.
pub fn forgetful_f(a: &Formula) -> Formula {
    match a.node() {
        Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => a.clone(),
        Node::And(x, y) => Formula::and(forgetful_f(x), forgetful_f(y)),
        Node::Or(x, y) => Formula::or(forgetful_f(x), forgetful_f(y)),
        Node::Imp(x, y) => Formula::imp(forgetful_f(x), forgetful_f(y)),
        Node::Box(x) => forgetful_f(x),
        Node::Dia(x) => forgetful_f(x),
    }
}

fn t_axiom_rules(g: &Calculus) -> (Option<(std::sync::Arc<str>, Formula)>, Option<(std::sync::Arc<str>, Formula)>) {
    let mut ta = None;
    let mut tb = None;
    for (name, f) in g.plain_axioms() {
        if ta.is_none() && matches_t_a(&f) {
            ta = Some((name.clone(), f.clone()));
        }
        if tb.is_none() && matches_t_b(&f) {
            tb = Some((name, f));
        }
    }
    (ta, tb)
}

/// `box c => c` via the T_a axiom.
fn unbox(g: &Calculus, c: &Formula) -> Result<Proof> {
    let (ta, _) = t_axiom_rules(g);
    let (name, ax) = ta.ok_or(Error::NotTFull)?;
    let atom = ax.atoms().into_iter().next().unwrap();
    let s = crate::formula::Substitution::new().bind_atom(atom, c.clone());
    let ax_node = crate::combinator::axiom_instance(&name, &ax, &s);
    let boxed = Formula::boxed(c.clone());
    let mp_p = mp(&FMultiset::new(), &boxed, c);
    Ok(cut_replace(mp_p, &Formula::imp(boxed, c.clone()), ax_node))
}

/// `c => dia c` via the T_b axiom.
fn undia(g: &Calculus, c: &Formula) -> Result<Proof> {
    let (_, tb) = t_axiom_rules(g);
    let (name, ax) = tb.ok_or(Error::NotTFull)?;
    let atom = ax.atoms().into_iter().next().unwrap();
    let s = crate::formula::Substitution::new().bind_atom(atom, c.clone());
    let ax_node = crate::combinator::axiom_instance(&name, &ax, &s);
    let dia = Formula::dia(c.clone());
    let mp_p = mp(&FMultiset::new(), c, &dia);
    Ok(cut_replace(mp_p, &Formula::imp(c.clone(), dia), ax_node))
}

/// `a => a^f` for a modal Horn formula in a T-full calculus (the T axioms
/// must be present as axioms).
pub fn prove_forget(g: &Calculus, a: &Formula) -> Result<Proof> {
    if !crate::classify::is_modal_horn(a) {
        return Err(Error::NotModalHorn(a.to_string()));
    }
    match a.node() {
        Node::Atom(_) | Node::Angled(_) | Node::Bot => Ok(ax_id(&FMultiset::new(), a)),
        Node::Box(b) => {
            let inner = prove_forget(g, b)?; // b => b^f
            let strip = unbox(g, b)?; // box b => b
            Ok(cut(strip, weaken_left_one(inner, &Formula::boxed(b.clone())), b))
        }
        Node::Imp(body, b) => {
            let inner = prove_forget(g, b)?; // b => b^f
            let bf = forgetful_f(b);
            let flat_body = forgetful_f(body);
            // {body^f} => body: per leaf dia^n r from r by chained T_b cuts,
            // with r projected out of the erased body tree
            fn leaf_restore(g: &Calculus, leaf: &Formula) -> Result<Proof> {
                // leaf = dia^n r; prove r => dia^n r
                let mut spine = Vec::new();
                let mut cur = leaf.clone();
                while let Node::Dia(inner) = cur.node() {
                    spine.push(cur.clone());
                    cur = inner.clone();
                }
                let mut p = ax_id(&FMultiset::new(), &cur); // r => r
                for d in spine.iter().rev() {
                    let from = match d.node() {
                        Node::Dia(x) => x.clone(),
                        _ => unreachable!(),
                    };
                    let prev = p.conclusion.succedent_formula().unwrap().clone();
                    let step = undia(g, &from)?; // from => dia from
                    debug_assert_eq!(prev, from);
                    p = cut(p, weaken_left_one(step, &cur), &from);
                }
                debug_assert_eq!(
                    p.conclusion,
                    Sequent::to(FMultiset::singleton(cur), leaf.clone())
                );
                Ok(p)
            }
            fn body_restore(
                g: &Calculus,
                tree: &Formula,
                flat_body: &Formula,
                path: &mut Vec<bool>,
            ) -> Result<Proof> {
                match tree.node() {
                    Node::And(x, y) => {
                        path.push(true);
                        let l = body_restore(g, x, flat_body, path)?;
                        path.pop();
                        path.push(false);
                        let r = body_restore(g, y, flat_body, path)?;
                        path.pop();
                        Ok(r_and(l, r))
                    }
                    _ => {
                        let restore = leaf_restore(g, tree)?; // {r} => dia^n r
                        let erased = forgetful_f(tree);
                        let proj = proj_path(flat_body, path); // {body^f} => r
                        debug_assert_eq!(proj.conclusion.succedent_formula(), Some(&erased));
                        Ok(cut_replace(restore, &erased, proj))
                    }
                }
            }
            let ctx = FMultiset::singleton(flat_body.clone());
            let premise1 = body_restore(g, body, &flat_body, &mut Vec::new())?;
            let premise2 = weaken_antecedent_to(inner, &ctx.with(b.clone()));
            let app = l_imp(premise1, premise2, body, b); // body^f, a => b^f
            Ok(r_imp(app, &flat_body, &bf))
        }
        _ => Err(Error::NotModalHorn(a.to_string())),
    }
}

/// No box or diamond outside angled atoms (which are opaque).
fn modality_free(f: &Formula) -> bool {
    match f.node() {
        Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => true,
        Node::Box(_) | Node::Dia(_) => false,
        Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => {
            modality_free(a) && modality_free(b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TClass {
    TFree,
    TFull,
}

pub struct ReductionResult {
    pub sigma_prime: FMultiset,
    /// `Sigma => /\ Sigma'` in the input calculus.
    pub derivation: Proof,
}

/// The reduction to implicational Horn formulas: T-free calculi keep the
/// modality-free part of `Sigma`; T-full calculi erase all modalities.
/// Negated atoms and targets are the remaining parts of the source sequent
/// `Sigma, {~q_j} => \/ p_i`; the reduced sequent
/// `Sigma' => \/ p_i | \/ q_j` is classically valid whenever the source
/// was provable.
pub fn reduce(
    g: &Calculus,
    tclass: TClass,
    sigma: &FMultiset,
    negated_atoms: &[Formula],
    targets: &[Formula],
) -> Result<ReductionResult> {
    for a in negated_atoms.iter().chain(targets) {
        if !is_atom(a) {
            return Err(Error::NotHorn(format!("{a} is not an atom")));
        }
    }
    let mut memo = crate::classify::ClassMemo::new();
    for f in sigma.iter_flat() {
        if !memo.modal_horn(f) {
            return Err(Error::NotHorn(f.to_string()));
        }
    }
    // per-member implicational results with proofs Sigma => member'
    let mut items: Vec<(Formula, Proof)> = Vec::new();
    match tclass {
        TClass::TFree => {
            for (f, count) in sigma.iter() {
                if !modality_free(f) {
                    continue;
                }
                let (flat, eq) = flatten_modal_horn(f)?;
                for _ in 0..count {
                    let member = prove_member(sigma, f); // Sigma => f
                    let p = cut_replace(eq.lr.clone(), f, member); // Sigma => flat
                    items.push((flat.clone(), p));
                }
            }
        }
        TClass::TFull => {
            for (f, count) in sigma.iter() {
                let erased = forgetful_f(f);
                let forget = prove_forget(g, f)?; // {f} => f^f
                let (flat, eq) = flatten_modal_horn(&erased)?;
                for _ in 0..count {
                    let member = prove_member(sigma, f);
                    let p = cut_replace(forget.clone(), f, member); // Sigma => f^f
                    let p = cut_replace(eq.lr.clone(), &erased, p); // Sigma => flat
                    items.push((flat.clone(), p));
                }
            }
        }
    }
    // fold in the canonical order of Sigma'
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let sigma_prime: FMultiset = items.iter().map(|(f, _)| f.clone()).collect();
    let derivation = fold_r_and(sigma, items.into_iter().map(|(_, p)| p).collect());
    debug_assert_eq!(
        derivation.conclusion,
        Sequent::to(sigma.clone(), sigma_prime.big_and())
    );
    let _ = subst_s; // sigma members are already in L+ form
    Ok(ReductionResult { sigma_prime, derivation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::add_axioms;
    use crate::catalog::{axiom, builtin};
    use crate::parse::parse_formula;
    use crate::proof::check_proof;
    use crate::semantics::{eval_one_node, OneNodeModel};

    fn f(text: &str) -> Formula {
        parse_formula(text, crate::formula::LanguageTag::FullPlus).unwrap()
    }

    fn lj_valid(p: &Proof) {
        let lj = builtin("LJ").unwrap();
        let v = check_proof(&lj, p, &[]);
        assert!(v.is_valid(), "{v}\n  {}", p.conclusion);
    }

    fn atoms_of(text: &str) -> Vec<Formula> {
        text.split(',').map(|s| f(s.trim())).collect()
    }

    #[test]
    fn bot_halts_with_first_target() {
        let gamma = FMultiset::singleton(f("bot"));
        let targets = atoms_of("p1, p2");
        match unit_propagate(&gamma, &targets).unwrap() {
            UnitPropOutcome::Found { index, proof } => {
                assert_eq!(index, 0);
                assert_eq!(proof.conclusion, Sequent::to(gamma, f("p1")));
                lj_valid(&proof);
            }
            _ => panic!("expected Found"),
        }
    }

    #[test]
    fn chain_propagation() {
        let gamma: FMultiset = [f("p"), f("p -> q")].into_iter().collect();
        let targets = atoms_of("q, r");
        match unit_propagate(&gamma, &targets).unwrap() {
            UnitPropOutcome::Found { index, proof } => {
                assert_eq!(index, 0);
                assert_eq!(proof.conclusion, Sequent::to(gamma, f("q")));
                lj_valid(&proof);
            }
            _ => panic!("expected Found"),
        }
    }

    #[test]
    fn invalid_yields_countermodel() {
        let gamma: FMultiset = [f("p -> q")].into_iter().collect();
        match unit_propagate(&gamma, &atoms_of("q")).unwrap() {
            UnitPropOutcome::NotValid { true_atoms } => assert!(true_atoms.is_empty()),
            _ => panic!("expected NotValid"),
        }
        let gamma: FMultiset = [f("a"), f("a & b -> q")].into_iter().collect();
        match unit_propagate(&gamma, &atoms_of("q")).unwrap() {
            UnitPropOutcome::NotValid { true_atoms } => {
                assert_eq!(true_atoms, vec![f("a")]);
            }
            _ => panic!("expected NotValid"),
        }
    }

    #[test]
    fn multi_body_and_duplicates() {
        let gamma: FMultiset = [
            f("a"),
            f("b"),
            f("a & (b & a) -> c"),
            f("c -> bot"),
        ]
        .into_iter()
        .collect();
        match unit_propagate(&gamma, &atoms_of("z")).unwrap() {
            UnitPropOutcome::Found { index, proof } => {
                assert_eq!(index, 0); // bot derived, first target
                lj_valid(&proof);
                assert_eq!(proof.conclusion, Sequent::to(gamma, f("z")));
            }
            _ => panic!("expected Found via bot"),
        }
    }

    #[test]
    fn angled_atoms_work_as_atoms() {
        let gamma: FMultiset = [f("<p & q>"), f("<p & q> -> <r>")].into_iter().collect();
        match unit_propagate(&gamma, &[f("<r>")]).unwrap() {
            UnitPropOutcome::Found { index, proof } => {
                assert_eq!(index, 0);
                lj_valid(&proof);
            }
            _ => panic!("expected Found"),
        }
    }

    #[test]
    fn rejects_non_horn() {
        let gamma = FMultiset::singleton(f("p | q"));
        assert!(matches!(unit_propagate(&gamma, &[f("p")]), Err(Error::NotHorn(_))));
        assert!(matches!(
            unit_propagate(&FMultiset::new(), &[f("p & q")]),
            Err(Error::NotHorn(_))
        ));
    }

    fn classical_valid(gamma: &FMultiset, targets: &[Formula]) -> bool {
        let mut atoms = std::collections::BTreeSet::new();
        for g in gamma.iter_flat() {
            for a in g.atoms() {
                atoms.insert(a.to_string().trim_matches(['<', '>']).to_string());
            }
        }
        // restrict to named atoms for the oracle
        let atom_names: Vec<String> = gamma
            .iter_flat()
            .chain(targets.iter())
            .flat_map(|g| g.atoms())
            .filter_map(|a| match a.node() {
                Node::Atom(n) => Some(n.to_string()),
                _ => None,
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for mask in 0u64..(1 << atom_names.len()) {
            let truth: Vec<String> = atom_names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone())
                .collect();
            let m = OneNodeModel::new(true, truth);
            let all = gamma.iter_flat().all(|g| eval_one_node(g, &m).unwrap());
            let some = targets.iter().any(|t| eval_one_node(t, &m).unwrap());
            if all && !some {
                return false;
            }
        }
        true
    }

    #[test]
    fn oracle_agreement_small() {
        // deterministic small sweep: all Horn instances over atoms a, b
        // with one or two clauses from a fixed pool
        let pool = [
            f("a"),
            f("b"),
            f("a -> b"),
            f("b -> a"),
            f("a & b -> c"),
            f("c -> bot"),
            f("a -> c"),
        ];
        let targets = atoms_of("c, b");
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                let gamma: FMultiset = [pool[i].clone(), pool[j].clone()].into_iter().collect();
                let expected = classical_valid(&gamma, &targets);
                match unit_propagate(&gamma, &targets).unwrap() {
                    UnitPropOutcome::Found { proof, .. } => {
                        assert!(expected, "false positive on {gamma:?}");
                        lj_valid(&proof);
                    }
                    UnitPropOutcome::NotValid { true_atoms } => {
                        assert!(!expected, "missed valid {gamma:?}");
                        // the countermodel falsifies the sequent
                        let m = OneNodeModel::new(
                            true,
                            true_atoms.iter().map(|a| a.to_string()),
                        );
                        assert!(gamma.iter_flat().all(|g| eval_one_node(g, &m).unwrap()));
                        assert!(!targets.iter().any(|t| eval_one_node(t, &m).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn flatten_examples() {
        let (flat, eq) = flatten_modal_horn(&f("p -> q -> r")).unwrap();
        assert_eq!(flat, f("p & q -> r"));
        lj_valid(&eq.lr);
        lj_valid(&eq.rl);
        let (flat, eq) = flatten_modal_horn(&f("p")).unwrap();
        assert_eq!(flat, f("p"));
        lj_valid(&eq.lr);
        lj_valid(&eq.rl);
        // three-deep nest with conjunction bodies
        let deep = f("a & b -> (c -> (d & e -> bot))");
        let (flat, eq) = flatten_modal_horn(&deep).unwrap();
        assert_eq!(flat, f("a & b & c & d & e -> bot"));
        lj_valid(&eq.lr);
        lj_valid(&eq.rl);
        assert!(flatten_modal_horn(&f("box p -> q")).is_err());
    }

    #[test]
    fn forgetful_examples() {
        assert_eq!(
            forgetful_f(&f("box (dia p & dia q -> box r)")),
            f("p & q -> r")
        );
        assert_eq!(forgetful_f(&f("p | q")), f("p | q"));
        assert_eq!(forgetful_f(&Formula::dia_n(f("p"), 3)), f("p"));
    }

    fn ckt() -> Calculus {
        let ck = builtin("CK").unwrap();
        add_axioms(
            &ck,
            &[
                ("T_a".into(), axiom("T_a").unwrap()),
                ("T_b".into(), axiom("T_b").unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn prove_forget_cases() {
        let g = ckt();
        for text in ["p", "box p", "dia r -> q", "box (dia p & q -> r)", "<a>", "box box <a>"] {
            let a = f(text);
            let p = prove_forget(&g, &a).unwrap();
            let v = check_proof(&g, &p, &[]);
            assert!(v.is_valid(), "{text}: {v}");
            assert_eq!(
                p.conclusion,
                Sequent::to(FMultiset::singleton(a.clone()), forgetful_f(&a))
            );
        }
        // missing T axioms
        let ck = builtin("CK").unwrap();
        assert!(matches!(prove_forget(&ck, &f("box p")), Err(Error::NotTFull)));
        assert!(matches!(prove_forget(&ckt(), &f("p | q")), Err(Error::NotModalHorn(_))));
    }

    #[test]
    fn reduce_t_free_and_t_full() {
        let ck = builtin("CK").unwrap();
        let sigma: FMultiset = [f("<a>"), Formula::boxed(f("<b>")), f("<a> -> <c>")]
            .into_iter()
            .collect();
        let r = reduce(&ck, TClass::TFree, &sigma, &[], &[f("<c>")]).unwrap();
        assert_eq!(
            r.sigma_prime,
            [f("<a>"), f("<a> -> <c>")].into_iter().collect::<FMultiset>()
        );
        let v = check_proof(&ck, &r.derivation, &[]);
        assert!(v.is_valid(), "{v}");

        let g = ckt();
        let sigma: FMultiset = [Formula::boxed(f("<b>"))].into_iter().collect();
        let r = reduce(&g, TClass::TFull, &sigma, &[], &[f("<b>")]).unwrap();
        assert_eq!(r.sigma_prime, FMultiset::singleton(f("<b>")));
        let v = check_proof(&g, &r.derivation, &[]);
        assert!(v.is_valid(), "{v}");
        // a nested case: box (dia <a> -> <b>) erases to <a> -> <b>
        let sigma: FMultiset =
            [Formula::boxed(f("dia <a> -> <b>")), f("<a>")].into_iter().collect();
        let r = reduce(&g, TClass::TFull, &sigma, &[], &[f("<b>")]).unwrap();
        assert!(r.sigma_prime.contains(&f("<a> -> <b>")));
        assert!(check_proof(&g, &r.derivation, &[]).is_valid());
        // every output is implicational Horn
        for e in r.sigma_prime.iter_flat() {
            assert!(crate::classify::is_implicational_horn(e));
        }
    }
}
