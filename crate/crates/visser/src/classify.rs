//! Formula-class recognizers (basic, almost positive, constructive, Harrop,
//! modal/implicational Horn), rule classification, the rule-to-axiom
//! conversion, and normalization of constructive calculi to `CK + C` form.

use std::collections::HashMap;
use std::sync::Arc;

use crate::calculus::{add_axioms, Calculus, MetaSequent, MetaSuccedent, RuleSchema};
use crate::catalog::{builtin, k_box_rule, k_dia_rule};
use crate::combinator::{
    ax_id, ax_l_bot, axiom_instance, collapse_antecedent, contract_antecedent_to, cut,
    cut_replace, fold_r_and, mp, or_elim, or_inject, proj_path, prove_big_and_with, prove_member,
    r_imp, weaken_antecedent_to, weaken_left_one, weaken_right,
};
use crate::error::{Error, Result};
use crate::formula::{
    apply_subst, big_and_list, big_or_list, FMultiset, Formula, Node, Sequent, Substitution,
};
use crate::proof::{Justification, Proof};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum FormulaClass {
    Basic,
    AlmostPositive,
    Constructive,
    Harrop,
    ModalHorn,
    ImplicationalHorn,
}

/// Memoized recognizers keyed by shared subterm identity; safe because
/// pointer equality implies structural equality.
#[derive(Default)]
pub struct ClassMemo {
    basic: HashMap<usize, bool>,
    ap: HashMap<usize, bool>,
    con: HashMap<usize, bool>,
    harrop: HashMap<usize, bool>,
    modal_horn: HashMap<usize, bool>,
    impl_horn: HashMap<usize, bool>,
}

impl ClassMemo {
    pub fn new() -> ClassMemo {
        ClassMemo::default()
    }

    /// Atoms, top, bot, closed under and/or/dia.
    pub fn basic(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.basic.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => true,
            Node::And(a, b) | Node::Or(a, b) => self.basic(a) && self.basic(b),
            Node::Dia(a) => self.basic(a),
            Node::Imp(..) | Node::Box(..) => false,
        };
        self.basic.insert(f.key(), v);
        v
    }

    /// Basic formulas, closed under and/or/box/dia and `A -> B` with `A`
    /// basic and `B` almost positive.
    pub fn almost_positive(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.ap.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => true,
            Node::And(a, b) | Node::Or(a, b) => self.almost_positive(a) && self.almost_positive(b),
            Node::Box(a) | Node::Dia(a) => self.almost_positive(a),
            Node::Imp(a, b) => self.basic(a) && self.almost_positive(b),
        };
        self.ap.insert(f.key(), v);
        v
    }

    /// Basic formulas, closed under and/box and `A -> B` with `A` almost
    /// positive and `B` constructive.
    pub fn constructive(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.con.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => true,
            Node::And(a, b) => self.constructive(a) && self.constructive(b),
            Node::Box(a) => self.constructive(a),
            Node::Imp(a, b) => self.almost_positive(a) && self.constructive(b),
            Node::Or(..) | Node::Dia(..) => self.basic(f),
        };
        self.con.insert(f.key(), v);
        v
    }

    /// Atoms/top/bot closed under and/box and implications with Harrop
    /// succedents (arbitrary antecedents).
    pub fn harrop(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.harrop.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Atom(_) | Node::Angled(_) | Node::Top | Node::Bot => true,
            Node::And(a, b) => self.harrop(a) && self.harrop(b),
            Node::Box(a) => self.harrop(a),
            Node::Imp(_, b) => self.harrop(b),
            Node::Or(..) | Node::Dia(..) => false,
        };
        self.harrop.insert(f.key(), v);
        v
    }

    fn is_atom(f: &Formula) -> bool {
        matches!(f.node(), Node::Atom(_) | Node::Angled(_))
    }

    /// Non-empty conjunction tree of atoms.
    fn atom_conj(f: &Formula) -> bool {
        match f.node() {
            Node::And(a, b) => Self::atom_conj(a) && Self::atom_conj(b),
            _ => Self::is_atom(f),
        }
    }

    /// Non-empty conjunction tree of `dia^n`-prefixed atoms.
    fn dia_atom_conj(f: &Formula) -> bool {
        fn dia_atom(f: &Formula) -> bool {
            match f.node() {
                Node::Dia(a) => dia_atom(a),
                _ => ClassMemo::is_atom(f),
            }
        }
        match f.node() {
            Node::And(a, b) => Self::dia_atom_conj(a) && Self::dia_atom_conj(b),
            _ => dia_atom(f),
        }
    }

    /// bot, atoms, and `/\ Q -> r` with `Q` a non-empty multiset of atoms
    /// and `r` an atom or bot. Not closed under conjunction; top excluded.
    pub fn implicational_horn(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.impl_horn.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Bot | Node::Atom(_) | Node::Angled(_) => true,
            Node::Imp(a, b) => {
                Self::atom_conj(a) && (matches!(b.node(), Node::Bot) || Self::is_atom(b))
            }
            _ => false,
        };
        self.impl_horn.insert(f.key(), v);
        v
    }

    /// bot, atoms, closed under box and `A -> B` with `A` a conjunction of
    /// `dia^n` atoms and `B` modal Horn.
    pub fn modal_horn(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.modal_horn.get(&f.key()) {
            return v;
        }
        let v = match f.node() {
            Node::Bot | Node::Atom(_) | Node::Angled(_) => true,
            Node::Box(a) => self.modal_horn(a),
            Node::Imp(a, b) => Self::dia_atom_conj(a) && self.modal_horn(b),
            _ => false,
        };
        self.modal_horn.insert(f.key(), v);
        v
    }

    pub fn holds(&mut self, class: FormulaClass, f: &Formula) -> bool {
        match class {
            FormulaClass::Basic => self.basic(f),
            FormulaClass::AlmostPositive => self.almost_positive(f),
            FormulaClass::Constructive => self.constructive(f),
            FormulaClass::Harrop => self.harrop(f),
            FormulaClass::ModalHorn => self.modal_horn(f),
            FormulaClass::ImplicationalHorn => self.implicational_horn(f),
        }
    }
}

pub fn is_basic(f: &Formula) -> bool {
    ClassMemo::new().basic(f)
}

pub fn is_almost_positive(f: &Formula) -> bool {
    ClassMemo::new().almost_positive(f)
}

pub fn is_constructive_formula(f: &Formula) -> bool {
    ClassMemo::new().constructive(f)
}

pub fn is_harrop(f: &Formula) -> bool {
    ClassMemo::new().harrop(f)
}

pub fn is_modal_horn(f: &Formula) -> bool {
    ClassMemo::new().modal_horn(f)
}

pub fn is_implicational_horn(f: &Formula) -> bool {
    ClassMemo::new().implicational_horn(f)
}

/// Path (child indices) to the first subformula violating `class`, when
/// the formula is outside the class.
pub fn class_witness(f: &Formula, class: FormulaClass) -> Option<Vec<usize>> {
    let mut memo = ClassMemo::new();
    if memo.holds(class, f) {
        return None;
    }
    let mut path = Vec::new();
    witness_walk(f, class, &mut memo, &mut path);
    Some(path)
}

fn witness_walk(f: &Formula, class: FormulaClass, memo: &mut ClassMemo, path: &mut Vec<usize>) {
    debug_assert!(!memo.holds(class, f));
    let descend = |child: &Formula, idx: usize, class: FormulaClass, memo: &mut ClassMemo, path: &mut Vec<usize>| {
        path.push(idx);
        witness_walk(child, class, memo, path);
    };
    match (class, f.node()) {
        (FormulaClass::Basic, Node::And(a, b)) | (FormulaClass::Basic, Node::Or(a, b)) => {
            if !memo.basic(a) {
                descend(a, 0, class, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::Basic, Node::Dia(a)) => descend(a, 0, class, memo, path),
        (FormulaClass::AlmostPositive, Node::And(a, b))
        | (FormulaClass::AlmostPositive, Node::Or(a, b)) => {
            if !memo.almost_positive(a) {
                descend(a, 0, class, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::AlmostPositive, Node::Box(a)) | (FormulaClass::AlmostPositive, Node::Dia(a)) => {
            descend(a, 0, class, memo, path)
        }
        (FormulaClass::AlmostPositive, Node::Imp(a, b)) => {
            if !memo.basic(a) {
                descend(a, 0, FormulaClass::Basic, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::Constructive, Node::And(a, b)) => {
            if !memo.constructive(a) {
                descend(a, 0, class, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::Constructive, Node::Box(a)) => descend(a, 0, class, memo, path),
        (FormulaClass::Constructive, Node::Imp(a, b)) => {
            if !memo.almost_positive(a) {
                descend(a, 0, FormulaClass::AlmostPositive, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::Constructive, Node::Or(..)) | (FormulaClass::Constructive, Node::Dia(..)) => {
            // a positive disjunction-like node outside the basic fragment
            witness_walk(f, FormulaClass::Basic, memo, path)
        }
        (FormulaClass::Harrop, Node::And(a, b)) => {
            if !memo.harrop(a) {
                descend(a, 0, class, memo, path);
            } else {
                descend(b, 1, class, memo, path);
            }
        }
        (FormulaClass::Harrop, Node::Box(a)) => descend(a, 0, class, memo, path),
        (FormulaClass::Harrop, Node::Imp(_, b)) => descend(b, 1, class, memo, path),
        // remaining cases: the node itself is the violation
        _ => {}
    }
}

/// Per-class verdicts with a witness path for each failed class.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FormulaClassVerdict {
    pub basic: bool,
    pub almost_positive: bool,
    pub constructive: bool,
    pub harrop: bool,
    pub modal_horn: bool,
    pub implicational_horn: bool,
    pub witness: Vec<(FormulaClass, Vec<usize>)>,
}

pub fn classify_formula(f: &Formula) -> FormulaClassVerdict {
    let mut memo = ClassMemo::new();
    let classes = [
        FormulaClass::Basic,
        FormulaClass::AlmostPositive,
        FormulaClass::Constructive,
        FormulaClass::Harrop,
        FormulaClass::ModalHorn,
        FormulaClass::ImplicationalHorn,
    ];
    let mut witness = Vec::new();
    let val = |class: FormulaClass, memo: &mut ClassMemo| memo.holds(class, f);
    let results: Vec<bool> = classes.iter().map(|&c| val(c, &mut memo)).collect();
    for (&c, &ok) in classes.iter().zip(&results) {
        if !ok {
            if let Some(path) = class_witness(f, c) {
                witness.push((c, path));
            }
        }
    }
    FormulaClassVerdict {
        basic: results[0],
        almost_positive: results[1],
        constructive: results[2],
        harrop: results[3],
        modal_horn: results[4],
        implicational_horn: results[5],
        witness,
    }
}

/// One premise of a rule in the general left/right form.
#[derive(Debug, Clone)]
pub enum NPremise {
    /// `G ; phi => psi` with `||psi|| <= 1`.
    Imp { phi: FMultiset, psi: FMultiset },
    /// `G ; theta => D`.
    Delta { theta: FMultiset },
}

/// A rule parsed into the general form: all premises and the conclusion
/// share one plain context variable; left rules share a succedent variable
/// with their Delta-premises, right rules conclude in formulas.
#[derive(Debug, Clone)]
pub struct NForm {
    pub context: Arc<str>,
    pub delta: Option<Arc<str>>,
    pub premises: Vec<NPremise>,
    /// Antecedent formulas of the conclusion (eta for left rules, theta for
    /// right rules, in the paper's naming).
    pub concl_antecedent: FMultiset,
    /// Succedent formulas of the conclusion for right rules (`||.|| <= 1`).
    pub concl_succedent: Option<FMultiset>,
}

impl NForm {
    pub fn is_left(&self) -> bool {
        self.delta.is_some()
    }

    fn imp_premises(&self) -> Vec<(&FMultiset, &FMultiset)> {
        self.premises
            .iter()
            .filter_map(|p| match p {
                NPremise::Imp { phi, psi } => Some((phi, psi)),
                NPremise::Delta { .. } => None,
            })
            .collect()
    }

    fn delta_premises(&self) -> Vec<&FMultiset> {
        self.premises
            .iter()
            .filter_map(|p| match p {
                NPremise::Delta { theta } => Some(theta),
                NPremise::Imp { .. } => None,
            })
            .collect()
    }
}

fn single_plain_context(m: &MetaSequent) -> Option<Arc<str>> {
    match m.contexts.as_slice() {
        [slot] if !slot.boxed => Some(slot.var.clone()),
        _ => None,
    }
}

/// Parses a rule into the general form, or explains why it is outside it.
pub fn parse_nform(r: &RuleSchema) -> Result<NForm> {
    let not_in = |why: &str| Error::NotInRuleClass(format!("{}: {}", r.name, why));
    for m in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
        if let MetaSuccedent::Formulas(fs) = &m.succedent {
            if fs.cardinality() > 1 {
                return Err(Error::MultiConclusion(r.name.to_string()));
            }
        }
    }
    let ctx = single_plain_context(&r.conclusion)
        .ok_or_else(|| not_in("conclusion must carry exactly one plain context variable"))?;
    let delta = match &r.conclusion.succedent {
        MetaSuccedent::Var(v) => Some(v.clone()),
        MetaSuccedent::Formulas(_) => None,
    };
    let mut premises = Vec::new();
    for m in &r.premises {
        let pctx = single_plain_context(m)
            .ok_or_else(|| not_in("premises must carry exactly one plain context variable"))?;
        if pctx != ctx {
            return Err(not_in("premises must share the conclusion's context variable"));
        }
        match &m.succedent {
            MetaSuccedent::Var(v) => match &delta {
                Some(d) if v == d => premises.push(NPremise::Delta { theta: m.antecedent.clone() }),
                Some(_) => return Err(not_in("premise succedent variable differs from Delta")),
                None => return Err(not_in("right rules cannot have Delta premises")),
            },
            MetaSuccedent::Formulas(fs) => {
                premises.push(NPremise::Imp { phi: m.antecedent.clone(), psi: fs.clone() })
            }
        }
    }
    let concl_succedent = match &r.conclusion.succedent {
        MetaSuccedent::Var(_) => None,
        MetaSuccedent::Formulas(fs) => Some(fs.clone()),
    };
    Ok(NForm {
        context: ctx,
        delta,
        premises,
        concl_antecedent: r.conclusion.antecedent.clone(),
        concl_succedent,
    })
}

/// Classification outcome per the constructive rule templates.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum RuleClassVerdict {
    LeftConstructive,
    RightConstructive,
    ConstructiveAxiom,
    ModalK,
    NotConstructive(String),
}

impl RuleClassVerdict {
    pub fn is_constructive(&self) -> bool {
        matches!(
            self,
            RuleClassVerdict::LeftConstructive
                | RuleClassVerdict::RightConstructive
                | RuleClassVerdict::ConstructiveAxiom
        )
    }
}

/// Matches the rule against the two constructive templates, or recognizes
/// K_box/K_dia literally.
pub fn classify_rule(r: &RuleSchema) -> Result<RuleClassVerdict> {
    if r.same_shape(&k_box_rule()) || r.same_shape(&k_dia_rule()) {
        return Ok(RuleClassVerdict::ModalK);
    }
    // contextless axiom `=> A`: the G + A convention
    if r.is_axiom() && r.conclusion.contexts.is_empty() {
        if let MetaSuccedent::Formulas(fs) = &r.conclusion.succedent {
            if fs.cardinality() > 1 {
                return Err(Error::MultiConclusion(r.name.to_string()));
            }
            if r.conclusion.antecedent.is_empty() {
                let ok = fs.iter_flat().all(|f| is_constructive_formula(f));
                return Ok(if ok {
                    RuleClassVerdict::ConstructiveAxiom
                } else {
                    RuleClassVerdict::NotConstructive(format!(
                        "axiom formula is not constructive: {}",
                        fs.iter_flat().next().unwrap()
                    ))
                });
            }
        }
    }
    let nf = match parse_nform(r) {
        Ok(nf) => nf,
        Err(Error::MultiConclusion(n)) => return Err(Error::MultiConclusion(n)),
        Err(e) => return Ok(RuleClassVerdict::NotConstructive(e.to_string())),
    };
    let mut memo = ClassMemo::new();
    let check_all =
        |ms: &FMultiset, class: FormulaClass, what: &str, memo: &mut ClassMemo| -> Option<String> {
            ms.iter_flat()
                .find(|f| !memo.holds(class, f))
                .map(|f| format!("{what} formula `{f}` is not {class:?}"))
        };
    for (phi, psi) in nf.imp_premises() {
        if let Some(msg) = check_all(phi, FormulaClass::Basic, "premise antecedent", &mut memo) {
            return Ok(RuleClassVerdict::NotConstructive(msg));
        }
        if let Some(msg) =
            check_all(psi, FormulaClass::AlmostPositive, "premise succedent", &mut memo)
        {
            return Ok(RuleClassVerdict::NotConstructive(msg));
        }
    }
    if nf.is_left() {
        let deltas = nf.delta_premises();
        for theta in &deltas {
            if let Some(msg) =
                check_all(theta, FormulaClass::Constructive, "case premise", &mut memo)
            {
                return Ok(RuleClassVerdict::NotConstructive(msg));
            }
        }
        if deltas.len() > 1 {
            for theta in &deltas {
                if let Some(msg) = check_all(theta, FormulaClass::Basic, "case premise", &mut memo)
                {
                    return Ok(RuleClassVerdict::NotConstructive(format!(
                        "{msg} (required since the rule has {} case premises)",
                        deltas.len()
                    )));
                }
            }
        }
        if let Some(msg) = check_all(
            &nf.concl_antecedent,
            FormulaClass::AlmostPositive,
            "conclusion antecedent",
            &mut memo,
        ) {
            return Ok(RuleClassVerdict::NotConstructive(msg));
        }
        Ok(if r.is_axiom() {
            RuleClassVerdict::ConstructiveAxiom
        } else {
            RuleClassVerdict::LeftConstructive
        })
    } else {
        if let Some(msg) = check_all(
            &nf.concl_antecedent,
            FormulaClass::AlmostPositive,
            "conclusion antecedent",
            &mut memo,
        ) {
            return Ok(RuleClassVerdict::NotConstructive(msg));
        }
        if let Some(msg) = check_all(
            nf.concl_succedent.as_ref().unwrap(),
            FormulaClass::Constructive,
            "conclusion succedent",
            &mut memo,
        ) {
            return Ok(RuleClassVerdict::NotConstructive(msg));
        }
        Ok(if r.is_axiom() {
            RuleClassVerdict::ConstructiveAxiom
        } else {
            RuleClassVerdict::RightConstructive
        })
    }
}

struct AxParts {
    /// implications `/\phi_i -> \/psi_i` in premise order
    imps: Vec<Formula>,
    /// `X = /\ imps` (top when there are none)
    x: Formula,
    /// conclusion-antecedent conjunction `Y`
    y: Formula,
    /// `X & Y`
    body: Formula,
    /// right: `\/ eta`; left: `\/_j /\ theta_j`
    head: Formula,
    /// disjunct conjunctions for left rules, in premise order
    theta_conjs: Vec<Formula>,
}

fn ax_parts(nf: &NForm) -> AxParts {
    let imps: Vec<Formula> = nf
        .imp_premises()
        .iter()
        .map(|(phi, psi)| Formula::imp(phi.big_and(), psi.big_or()))
        .collect();
    let x = big_and_list(&imps);
    let y = nf.concl_antecedent.big_and();
    let body = Formula::and(x.clone(), y.clone());
    let theta_conjs: Vec<Formula> =
        nf.delta_premises().iter().map(|theta| theta.big_and()).collect();
    let head = if nf.is_left() {
        big_or_list(&theta_conjs)
    } else {
        nf.concl_succedent.as_ref().unwrap().big_or()
    };
    AxParts { imps, x, y, body, head, theta_conjs }
}

/// The formula `Ax_R` equivalent to the rule over LJ.
pub fn ax_formula(nf: &NForm) -> Formula {
    let parts = ax_parts(nf);
    Formula::imp(parts.body, parts.head)
}

/// Path of a member inside a left-associated fold of `n` leaves.
/// `true` = left child.
fn fold_path(n: usize, k: usize) -> Vec<bool> {
    assert!(k < n);
    let mut path = vec![true; n - 1 - k];
    if k > 0 {
        path.push(false);
    }
    path
}

/// Converts a rule in the general form into its axiom together with an
/// `LJ + R` proof of `=> Ax_R`.
pub fn rule_to_axiom(r: &RuleSchema) -> Result<(Formula, Proof)> {
    let nf = parse_nform(r)?;
    let parts = ax_parts(&nf);
    let ax = Formula::imp(parts.body.clone(), parts.head.clone());

    // Gamma* = the implication multiset; Delta* = head (left rules).
    let gstar: FMultiset = parts.imps.iter().cloned().collect();
    let mut premise_proofs: Vec<Proof> = Vec::new();
    let mut imp_idx = 0usize;
    let mut delta_idx = 0usize;
    for prem in &nf.premises {
        match prem {
            NPremise::Imp { phi, psi } => {
                let imp = &parts.imps[imp_idx];
                imp_idx += 1;
                let c = gstar.without(imp).sum(phi);
                let d1 = prove_big_and_with(&c, &phi.to_vec(), |m| prove_member(&c, m));
                let proof = match psi.iter_flat().next() {
                    Some(psi_f) => {
                        let d2 = ax_id(&c, psi_f);
                        crate::combinator::l_imp(d1, d2, &phi.big_and(), psi_f)
                    }
                    None => {
                        let d2 = ax_l_bot(&c, &FMultiset::new());
                        crate::combinator::l_imp(d1, d2, &phi.big_and(), &Formula::bot())
                    }
                };
                premise_proofs.push(proof);
            }
            NPremise::Delta { theta } => {
                let c = gstar.sum(theta);
                let d = prove_big_and_with(&c, &theta.to_vec(), |m| prove_member(&c, m));
                premise_proofs.push(or_inject(d, &parts.theta_conjs, delta_idx));
                delta_idx += 1;
            }
        }
    }
    // apply the rule itself (atoms bound identically so the stored
    // substitution is total over the schema)
    let mut subst =
        Substitution::new().bind_context(&nf.context, gstar.clone()).completed_for(&r.atoms());
    if let Some(d) = &nf.delta {
        subst = subst.bind_context(d, FMultiset::singleton(parts.head.clone()));
    }
    let concl_suc = if nf.is_left() {
        FMultiset::singleton(parts.head.clone())
    } else {
        nf.concl_succedent.clone().unwrap()
    };
    let app = Proof::rule_app(
        &r.name,
        subst,
        premise_proofs,
        Sequent::new(gstar.sum(&nf.concl_antecedent), concl_suc),
    );
    // move to a bot succedent for empty right heads
    let app = if !nf.is_left() && nf.concl_succedent.as_ref().unwrap().is_empty() {
        weaken_right(app, &Formula::bot())
    } else {
        app
    };
    // replace every antecedent member by X & Y via projection cuts
    let eta_list = nf.concl_antecedent.to_vec();
    let mut cur = app;
    for (k, imp) in parts.imps.iter().enumerate() {
        let mut path = vec![true];
        path.extend(fold_path(parts.imps.len(), k));
        let lemma = proj_path(&parts.body, &path);
        debug_assert_eq!(lemma.conclusion.succedent_formula(), Some(imp));
        cur = cut_replace(cur, imp, lemma);
    }
    for (k, e) in eta_list.iter().enumerate() {
        let mut path = vec![false];
        path.extend(fold_path(eta_list.len(), k));
        let lemma = proj_path(&parts.body, &path);
        debug_assert_eq!(lemma.conclusion.succedent_formula(), Some(e));
        cur = cut_replace(cur, e, lemma);
    }
    let cur = if parts.imps.is_empty() && eta_list.is_empty() {
        weaken_left_one(cur, &parts.body)
    } else {
        contract_antecedent_to(cur, &FMultiset::singleton(parts.body.clone()))
    };
    let head = cur.conclusion.succedent_formula().cloned().expect("single succedent");
    let proof = r_imp(cur, &parts.body, &head);
    debug_assert_eq!(proof.conclusion, Sequent::concl(ax.clone()));
    Ok((ax, proof))
}

/// Builds the deduction of a rule instance from its premises in
/// `LJ + (=> ax)`, where the axiom schema is registered as `ax_rule_name`.
/// The instance is given by the substitution used with `instantiate`.
pub fn axiom_to_rule_proof(
    ax: &Formula,
    ax_rule_name: &str,
    r: &RuleSchema,
    subst: &Substitution,
) -> Result<Proof> {
    let nf = parse_nform(r)?;
    let parts = ax_parts(&nf);
    if *ax != Formula::imp(parts.body.clone(), parts.head.clone()) {
        return Err(Error::Mismatch(format!(
            "axiom {ax} does not match rule {}",
            r.name
        )));
    }
    let subst = &subst.completed_for(&r.atoms());
    let sb = |f: &Formula| apply_subst(f, subst);
    let gamma_c = subst
        .context_value(&nf.context)
        .ok_or_else(|| Error::UnboundVariable(nf.context.to_string()))?
        .clone();
    let (inst_premises, inst_conclusion) = r.instantiate(subst)?;

    // Gamma_c => sigma(imp_i) from each implication hypothesis
    let mut imp_proofs: Vec<Proof> = Vec::new();
    let mut delta_proofs: Vec<Proof> = Vec::new();
    for (k, prem) in nf.premises.iter().enumerate() {
        let hyp = Proof::hypothesis(k, inst_premises[k].clone());
        match prem {
            NPremise::Imp { phi, psi } => {
                let phi_list: Vec<Formula> = phi.iter_flat().map(&sb).collect();
                let collapsed = collapse_antecedent(hyp, &phi_list);
                let body = sb(&phi.big_and());
                let proof = match psi.iter_flat().next() {
                    Some(psi_f) => r_imp(collapsed, &body, &sb(psi_f)),
                    None => {
                        let wr = weaken_right(collapsed, &Formula::bot());
                        r_imp(wr, &body, &Formula::bot())
                    }
                };
                imp_proofs.push(proof);
            }
            NPremise::Delta { theta } => {
                let theta_list: Vec<Formula> = theta.iter_flat().map(&sb).collect();
                delta_proofs.push(collapse_antecedent(hyp, &theta_list));
            }
        }
    }
    let dx = fold_r_and(&gamma_c, imp_proofs);
    debug_assert_eq!(dx.conclusion.succedent_formula(), Some(&sb(&parts.x)));

    // Gamma_c + sigma(eta) => sigma(X & Y)
    let eta_inst: FMultiset = nf.concl_antecedent.map(&sb);
    let c2 = gamma_c.sum(&eta_inst);
    let dxw = weaken_antecedent_to(dx, &c2);
    let eta_list: Vec<Formula> = nf.concl_antecedent.iter_flat().map(&sb).collect();
    let dy = prove_big_and_with(&c2, &eta_list, |m| prove_member(&c2, m));
    debug_assert_eq!(dy.conclusion.succedent_formula(), Some(&sb(&parts.y)));
    let dxy = crate::combinator::r_and(dxw, dy);

    // {sigma(X & Y)} => sigma(head) via the axiom instance
    let s_body = sb(&parts.body);
    let s_head = sb(&parts.head);
    let axp = axiom_instance(ax_rule_name, ax, subst);
    let mp_p = mp(&FMultiset::new(), &s_body, &s_head);
    let haxy = cut_replace(mp_p, &sb(ax), axp);

    // (1) Gamma_c + sigma(eta) => sigma(head)
    let one = cut(dxy, weaken_antecedent_to(haxy, &c2.with(s_body.clone())), &s_body);

    if nf.is_left() {
        // (2) Gamma_c + sigma(Delta*) => Delta_c
        let delta_c = inst_conclusion.succedent.clone();
        let two = if delta_proofs.is_empty() {
            ax_l_bot(&gamma_c, &delta_c)
        } else {
            let theta_conj_insts: Vec<Formula> = parts.theta_conjs.iter().map(&sb).collect();
            or_elim(delta_proofs, &theta_conj_insts)
        };
        // cut (1) and (2)
        let two_w = weaken_antecedent_to(two, &c2.with(s_head.clone()));
        let out = cut(one, two_w, &s_head);
        debug_assert_eq!(out.conclusion, inst_conclusion);
        Ok(out)
    } else if nf.concl_succedent.as_ref().unwrap().is_empty() {
        let out = cut(one, ax_l_bot(&c2, &FMultiset::new()), &Formula::bot());
        debug_assert_eq!(out.conclusion, inst_conclusion);
        Ok(out)
    } else {
        debug_assert_eq!(one.conclusion, inst_conclusion);
        Ok(one)
    }
}

/// How one source rule is realized in the normal form.
#[derive(Debug, Clone)]
enum RuleTranslation {
    /// Same schema exists in CK under this name.
    Base(Arc<str>),
    /// `=> A` axiom carried over under this name.
    Axiom(Arc<str>),
    /// Constructive rule replaced by its axiom.
    ViaAxiom { ax_name: Arc<str>, ax: Formula },
}

/// Result of normalizing a constructive calculus to `CK + C`.
pub struct Normalization {
    pub source: Calculus,
    pub target: Calculus,
    pub cset: Vec<(String, Formula)>,
    translations: std::collections::BTreeMap<Arc<str>, RuleTranslation>,
    /// target axiom name -> source realization
    back_axioms: std::collections::BTreeMap<Arc<str>, BackAxiom>,
}

#[derive(Debug, Clone)]
enum BackAxiom {
    SourceAxiom(Arc<str>),
    SourceRule { proof_of_ax: Proof },
}

/// Normalizes `g` to the pd-equivalent `CK + C`: every non-base rule must
/// be constructive; its axiom joins `C`. `simulate` and `unsimulate`
/// translate proofs in both directions by replacing rule instances with
/// their feasible-proof templates.
pub fn normalize_to_ck_plus_c(g: &Calculus) -> Result<Normalization> {
    let ck = builtin("CK").expect("builtin CK");
    let mut cset: Vec<(String, Formula)> = Vec::new();
    let mut translations = std::collections::BTreeMap::new();
    let mut back_axioms = std::collections::BTreeMap::new();
    let mut seen: std::collections::BTreeMap<Formula, Arc<str>> = std::collections::BTreeMap::new();
    for rule in g.rules() {
        if let Some(base) = ck.rules().find(|c| c.same_shape(rule)) {
            translations.insert(rule.name.clone(), RuleTranslation::Base(base.name.clone()));
            continue;
        }
        match classify_rule(rule)? {
            RuleClassVerdict::ModalK => unreachable!("modal K rules match CK shapes"),
            verdict if !verdict.is_constructive() => {
                let reason = match verdict {
                    RuleClassVerdict::NotConstructive(r) => r,
                    _ => unreachable!(),
                };
                return Err(Error::NotConstructiveCalculus(rule.name.to_string(), reason));
            }
            _ => {}
        }
        // contextless axiom: keep the formula itself
        if rule.is_axiom() && rule.conclusion.contexts.is_empty() {
            let a = match &rule.conclusion.succedent {
                MetaSuccedent::Formulas(fs) => fs.iter_flat().next().unwrap().clone(),
                MetaSuccedent::Var(_) => unreachable!(),
            };
            let name = match seen.get(&a) {
                Some(n) => n.clone(),
                None => {
                    let n: Arc<str> = rule.name.clone();
                    cset.push((n.to_string(), a.clone()));
                    seen.insert(a.clone(), n.clone());
                    back_axioms.insert(n.clone(), BackAxiom::SourceAxiom(rule.name.clone()));
                    n
                }
            };
            translations.insert(rule.name.clone(), RuleTranslation::Axiom(name));
            continue;
        }
        let (ax, proof_of_ax) = rule_to_axiom(rule)?;
        let name = match seen.get(&ax) {
            Some(n) => n.clone(),
            None => {
                let n: Arc<str> = Arc::from(format!("ax_{}", rule.name).as_str());
                cset.push((n.to_string(), ax.clone()));
                seen.insert(ax.clone(), n.clone());
                back_axioms.insert(
                    n.clone(),
                    BackAxiom::SourceRule { proof_of_ax: proof_of_ax.clone() },
                );
                n
            }
        };
        translations.insert(rule.name.clone(), RuleTranslation::ViaAxiom { ax_name: name, ax });
    }
    let mut target = add_axioms(&ck, &cset)?;
    target.name = format!("CK+C[{}]", g.name);
    Ok(Normalization { source: g.clone(), target, cset, translations, back_axioms })
}

impl Normalization {
    /// Translates a proof in the source calculus to `CK + C`.
    pub fn simulate(&self, proof: &Proof) -> Result<Proof> {
        let (rule, subst, premises) = match &proof.justification {
            Justification::Hypothesis(_) => return Ok(proof.clone()),
            Justification::RuleApp { rule, subst, premises } => (rule, subst, premises),
        };
        let children: Vec<Proof> =
            premises.iter().map(|p| self.simulate(p)).collect::<Result<Vec<_>>>()?;
        match self
            .translations
            .get(rule)
            .ok_or_else(|| Error::UnknownRule(rule.to_string()))?
        {
            RuleTranslation::Base(name) | RuleTranslation::Axiom(name) => Ok(Proof::rule_app(
                name,
                subst.clone(),
                children,
                proof.conclusion.clone(),
            )),
            RuleTranslation::ViaAxiom { ax_name, ax } => {
                let schema = self.source.rule(rule).unwrap();
                let deduction = axiom_to_rule_proof(ax, ax_name, schema, subst)?;
                Ok(deduction.graft(&children))
            }
        }
    }

    /// Translates a proof in `CK + C` back to the source calculus. Base
    /// rules must be literally present in the source (builtin calculi
    /// contain them); axiom instances are replaced by the source proof of
    /// the axiom under the instance substitution.
    pub fn unsimulate(&self, proof: &Proof) -> Result<Proof> {
        let (rule, subst, premises) = match &proof.justification {
            Justification::Hypothesis(_) => return Ok(proof.clone()),
            Justification::RuleApp { rule, subst, premises } => (rule, subst, premises),
        };
        let children: Vec<Proof> =
            premises.iter().map(|p| self.unsimulate(p)).collect::<Result<Vec<_>>>()?;
        if let Some(back) = self.back_axioms.get(rule) {
            match back {
                BackAxiom::SourceAxiom(name) => {
                    return Ok(Proof::rule_app(name, subst.clone(), children, proof.conclusion.clone()))
                }
                BackAxiom::SourceRule { proof_of_ax, .. } => {
                    let instd = proof_of_ax.map_formulas(&|f| apply_subst(f, subst));
                    debug_assert_eq!(instd.conclusion, proof.conclusion);
                    return Ok(instd);
                }
            }
        }
        // a CK base rule: find it in the source
        let target_schema = self
            .target
            .rule(rule)
            .ok_or_else(|| Error::UnknownRule(rule.to_string()))?;
        if let Some(src) = self.source.rule(rule) {
            if src.same_shape(target_schema) {
                return Ok(Proof::rule_app(rule, subst.clone(), children, proof.conclusion.clone()));
            }
        }
        if let Some(src) = self.source.has_rule_shaped(target_schema) {
            if src.premises == target_schema.premises && src.conclusion == target_schema.conclusion
            {
                return Ok(Proof::rule_app(
                    &src.name,
                    subst.clone(),
                    children,
                    proof.conclusion.clone(),
                ));
            }
        }
        Err(Error::NotStrong(format!(
            "source calculus {} lacks base rule {rule}",
            self.source.name
        )))
    }
}
