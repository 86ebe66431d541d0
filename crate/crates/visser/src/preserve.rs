//! Provability preservation: from a `CK + C`-proof of `Omega => Lambda` to
//! a modal Horn side multiset `Sigma_pi`, a proof of
//! `Sigma_pi, Omega^t => Lambda^t`, and the discharge proof
//! `=> /\ Sigma_pi^s`.

use std::collections::BTreeMap;

use crate::calculus::{Calculus, MetaSuccedent};
use crate::catalog::builtin;
use crate::combinator::{
    ax_id, ax_l_bot, collapse_antecedent, contract_antecedent_to, cut_replace, fold_r_and, k_box,
    k_dia, l_and1, l_and2, l_imp, l_or, mp, prove_member, r_and, r_imp, weaken_antecedent_to,
    weaken_left_one, weaken_right,
};
use crate::error::{Error, Result};
use crate::formula::{big_and_list, FMultiset, Formula, Sequent};
use crate::proof::{check_proof, Justification, Proof};
use crate::translate::{commute, prove_t_implies_angle, subst_s, trans_t, trans_t_multiset, CommuteClass};

pub struct PreservationResult {
    pub sigma_pi: FMultiset,
    /// `Sigma_pi, Omega^t => Lambda^t` in the input calculus.
    pub translated: Proof,
    /// `=> /\ Sigma_pi^s` in the input calculus.
    pub discharge: Proof,
    /// per-member discharge proofs `=> e^s`
    pub discharge_parts: BTreeMap<Formula, Proof>,
}

/// The axiom part `C` of a normal-form calculus `CK + C`, or an error
/// naming the offending rule.
pub fn normal_form_axioms(g: &Calculus) -> Result<Vec<(std::sync::Arc<str>, Formula)>> {
    let ck = builtin("CK").expect("builtin CK");
    let mut axioms = Vec::new();
    for rule in g.rules() {
        if let Some(base) = ck.rule(&rule.name) {
            if base.same_shape(rule) {
                continue;
            }
            return Err(Error::NotNormalForm(format!(
                "rule `{}` clashes with the CK rule of that name",
                rule.name
            )));
        }
        if rule.is_axiom() && rule.conclusion.contexts.is_empty() && rule.conclusion.antecedent.is_empty() {
            if let MetaSuccedent::Formulas(fs) = &rule.conclusion.succedent {
                if fs.cardinality() == 1 {
                    let a = fs.iter_flat().next().unwrap().clone();
                    if !crate::classify::is_constructive_formula(&a) {
                        return Err(Error::NotNormalForm(format!(
                            "axiom `{}` is not constructive",
                            rule.name
                        )));
                    }
                    axioms.push((rule.name.clone(), a));
                    continue;
                }
            }
        }
        return Err(Error::NotNormalForm(format!(
            "rule `{}` is neither a CK rule nor an axiom `=> A`",
            rule.name
        )));
    }
    for base in ck.rules() {
        if g.rule(&base.name).is_none() {
            return Err(Error::NotNormalForm(format!("missing CK rule `{}`", base.name)));
        }
    }
    Ok(axioms)
}

struct Preserver<'a> {
    g: &'a Calculus,
    axioms: BTreeMap<std::sync::Arc<str>, Formula>,
    parts: BTreeMap<Formula, Proof>,
}

/// Runs the preservation transformer. The calculus must be in `CK + C`
/// normal form and the proof must check in it without assumptions.
pub fn preserve(g: &Calculus, proof: &Proof) -> Result<PreservationResult> {
    let axioms = normal_form_axioms(g)?.into_iter().collect();
    let verdict = check_proof(g, proof, &[]);
    if let crate::proof::Verdict::Invalid { path, reason } = verdict {
        return Err(Error::ProofInvalid(format!("at {path:?}: {reason}")));
    }
    let mut pres = Preserver { g, axioms, parts: BTreeMap::new() };
    let (sigma_pi, translated) = pres.walk(proof)?;
    let discharge = crate::translate::assemble_sigma(&sigma_pi, &pres.parts);
    Ok(PreservationResult { sigma_pi, translated, discharge, discharge_parts: pres.parts })
}

impl<'a> Preserver<'a> {
    fn record(&mut self, horn: &Formula, proof: impl FnOnce() -> Proof) {
        if !self.parts.contains_key(horn) {
            let p = proof();
            debug_assert_eq!(
                p.conclusion,
                Sequent::concl(subst_s(horn)),
                "discharge part for {horn}"
            );
            self.parts.insert(horn.clone(), p);
        }
    }

    fn top_unit(&mut self) -> FMultiset {
        let unit = Formula::angled(Formula::top()).unwrap();
        self.record(&unit, || crate::combinator::ax_r_top(&FMultiset::new()));
        FMultiset::singleton(unit)
    }

    /// The context-implication Horn formula for a right rule, paired with
    /// its body members (empty body degenerates to the bare head).
    fn context_implication(&mut self, node: &Proof, omega: &FMultiset, extra: Option<&Formula>, head: &Formula) -> (Formula, Vec<Formula>) {
        let angled = |f: &Formula| Formula::angled(f.clone()).expect("plain formula");
        let omega_list: Vec<Formula> = omega.to_vec();
        let mut body: Vec<Formula> = omega_list.iter().map(&angled).collect();
        if let Some(x) = extra {
            body.push(angled(x));
        }
        let head_angled = angled(head);
        let horn = if body.is_empty() {
            head_angled.clone()
        } else {
            Formula::imp(big_and_list(&body), head_angled.clone())
        };
        let mut source: Vec<Formula> = omega_list;
        if let Some(x) = extra {
            source.push(x.clone());
        }
        let node_clone = node.clone();
        self.record(&horn, move || {
            if source.is_empty() {
                node_clone
            } else {
                let collapsed = collapse_antecedent(node_clone, &source);
                let body_s = big_and_list(&source);
                let head_s = collapsed.conclusion.succedent_formula().unwrap().clone();
                r_imp(collapsed, &body_s, &head_s)
            }
        });
        (horn, body)
    }

    /// Extends `structural` (proving `C => X`) with the angled head derived
    /// from `horn` whose body members come from antecedent formulas `froms`
    /// (each with a one-step proof `{from} => angled-member`).
    fn with_angled_head(
        &self,
        structural: Proof,
        ctx: &FMultiset,
        body: &[Formula],
        froms: &[(Formula, Proof)],
        head_angled: &Formula,
    ) -> Proof {
        let structural = weaken_antecedent_to(structural, ctx);
        let named = if body.is_empty() {
            prove_member(ctx, head_angled)
        } else {
            let per: Vec<Proof> = froms
                .iter()
                .map(|(_, lemma)| weaken_antecedent_to(lemma.clone(), ctx))
                .collect();
            let fold = fold_r_and(ctx, per); // ctx => /\ body
            let body_conj = big_and_list(body);
            debug_assert_eq!(fold.conclusion.succedent_formula(), Some(&body_conj));
            let mp_p = mp(&FMultiset::new(), &body_conj, head_angled);
            let named = cut_replace(mp_p, &body_conj, fold);
            contract_antecedent_to(named, ctx)
        };
        r_and(structural, named)
    }

    fn walk(&mut self, node: &Proof) -> Result<(FMultiset, Proof)> {
        let (rule, subst, premises) = match &node.justification {
            Justification::Hypothesis(_) => {
                return Err(Error::ProofInvalid(
                    "preservation requires an assumption-free proof".into(),
                ))
            }
            Justification::RuleApp { rule, subst, premises } => (rule, subst, premises),
        };
        let sv = |name: &str| -> Formula {
            let key = Formula::atom(name);
            subst.atom_value(&key).cloned().unwrap_or(key)
        };
        let cv = |name: &str| -> FMultiset { subst.context_value(name).cloned().unwrap_or_default() };
        let angled = |f: &Formula| Formula::angled(f.clone()).expect("plain formula");
        match rule.as_ref() {
            "id" => {
                let sigma = self.top_unit();
                let a = trans_t(&sv("p"))?;
                let ctx = sigma.sum(&trans_t_multiset(&cv("G"))?);
                Ok((sigma, ax_id(&ctx, &a)))
            }
            "L_bot" => {
                let sigma = self.top_unit();
                let ctx = sigma.sum(&trans_t_multiset(&cv("G"))?);
                let suc = trans_t_multiset(&cv("D"))?;
                Ok((sigma, ax_l_bot(&ctx, &suc)))
            }
            "R_top" => {
                // top^t = <top>, which is the sigma unit itself
                let sigma = self.top_unit();
                let unit = Formula::angled(Formula::top()).unwrap();
                let ctx = trans_t_multiset(&cv("G"))?;
                Ok((sigma, ax_id(&ctx, &unit)))
            }
            "L_w" => {
                let (sigma, tr) = self.walk(&premises[0])?;
                Ok((sigma, weaken_left_one(tr, &trans_t(&sv("p"))?)))
            }
            "R_w" => {
                let (sigma, tr) = self.walk(&premises[0])?;
                Ok((sigma, weaken_right(tr, &trans_t(&sv("p"))?)))
            }
            "L_c" => {
                let (sigma, tr) = self.walk(&premises[0])?;
                let target = tr.conclusion.antecedent.without(&trans_t(&sv("p"))?);
                Ok((sigma, contract_antecedent_to(tr, &target)))
            }
            "cut" => {
                let (s1, tr1) = self.walk(&premises[0])?;
                let (s2, tr2) = self.walk(&premises[1])?;
                let sigma = s1.sum(&s2);
                let a = trans_t(&sv("p"))?;
                let ctx = sigma.sum(&trans_t_multiset(&cv("G"))?);
                let left = weaken_antecedent_to(tr1, &ctx);
                let right = weaken_antecedent_to(tr2, &ctx.with(a.clone()));
                Ok((sigma, crate::combinator::cut(left, right, &a)))
            }
            "L_and1" | "L_and2" => {
                let (sigma, tr) = self.walk(&premises[0])?;
                let (a, b) = (sv("p"), sv("q"));
                let (at, bt) = (trans_t(&a)?, trans_t(&b)?);
                let inner = if rule.as_ref() == "L_and1" {
                    l_and1(tr, &at, &bt)
                } else {
                    l_and2(tr, &at, &bt)
                };
                let wrapped = l_and1(inner, &Formula::and(at, bt), &angled(&Formula::and(a, b)));
                Ok((sigma, wrapped))
            }
            "L_or" => {
                let (s1, tr1) = self.walk(&premises[0])?;
                let (s2, tr2) = self.walk(&premises[1])?;
                let sigma = s1.sum(&s2);
                let (a, b) = (sv("p"), sv("q"));
                let (at, bt) = (trans_t(&a)?, trans_t(&b)?);
                let base = sigma.sum(&trans_t_multiset(&cv("G"))?);
                let tr1 = weaken_antecedent_to(tr1, &base.with(at.clone()));
                let tr2 = weaken_antecedent_to(tr2, &base.with(bt.clone()));
                let inner = l_or(tr1, tr2, &at, &bt);
                let wrapped = l_and1(inner, &Formula::or(at, bt), &angled(&Formula::or(a, b)));
                Ok((sigma, wrapped))
            }
            "L_imp" => {
                let (s1, tr1) = self.walk(&premises[0])?;
                let (s2, tr2) = self.walk(&premises[1])?;
                let sigma = s1.sum(&s2);
                let (a, b) = (sv("p"), sv("q"));
                let (at, bt) = (trans_t(&a)?, trans_t(&b)?);
                let base = sigma.sum(&trans_t_multiset(&cv("G"))?);
                let tr1 = weaken_antecedent_to(tr1, &base);
                let tr2 = weaken_antecedent_to(tr2, &base.with(bt.clone()));
                let inner = l_imp(tr1, tr2, &at, &bt);
                let wrapped = l_and1(inner, &Formula::imp(at, bt), &angled(&Formula::imp(a, b)));
                Ok((sigma, wrapped))
            }
            "R_and" | "R_or1" | "R_or2" | "R_imp" => {
                let omega = cv("G");
                let (a, b) = (sv("p"), sv("q"));
                let (at, bt) = (trans_t(&a)?, trans_t(&b)?);
                let compound = match rule.as_ref() {
                    "R_and" => Formula::and(a.clone(), b.clone()),
                    "R_or1" | "R_or2" => Formula::or(a.clone(), b.clone()),
                    _ => Formula::imp(a.clone(), b.clone()),
                };
                let (horn, body) = self.context_implication(node, &omega, None, &compound);
                let (mut sigma, structural) = match rule.as_ref() {
                    "R_and" => {
                        let (s1, tr1) = self.walk(&premises[0])?;
                        let (s2, tr2) = self.walk(&premises[1])?;
                        let s = s1.sum(&s2);
                        let base = s.sum(&trans_t_multiset(&omega)?);
                        let tr1 = weaken_antecedent_to(tr1, &base);
                        let tr2 = weaken_antecedent_to(tr2, &base);
                        (s, r_and(tr1, tr2))
                    }
                    "R_or1" => {
                        let (s, tr) = self.walk(&premises[0])?;
                        (s, crate::combinator::r_or1(tr, &bt))
                    }
                    "R_or2" => {
                        let (s, tr) = self.walk(&premises[0])?;
                        (s, crate::combinator::r_or2(tr, &at))
                    }
                    _ => {
                        let (s, tr) = self.walk(&premises[0])?;
                        (s, r_imp(tr, &at, &bt))
                    }
                };
                sigma.insert(horn.clone(), 1);
                let ctx = sigma.sum(&trans_t_multiset(&omega)?);
                let froms: Vec<(Formula, Proof)> = omega
                    .to_vec()
                    .iter()
                    .map(|w| (trans_t(w).unwrap(), prove_t_implies_angle(w).unwrap()))
                    .collect();
                let head_angled = angled(&compound);
                let out = self.with_angled_head(structural, &ctx, &body, &froms, &head_angled);
                Ok((sigma, out))
            }
            "K_box" => {
                let omega = cv("G");
                let a = sv("p");
                let (s1, tr1) = self.walk(&premises[0])?;
                let boxed_a = Formula::boxed(a.clone());
                let (horn, body) =
                    self.context_implication(node, &omega.boxed(), None, &boxed_a);
                // box the child's sigma parts
                for (e, _) in s1.iter() {
                    let sub = self.parts.get(e).cloned().expect("child part");
                    self.record(&Formula::boxed(e.clone()), || k_box(sub));
                }
                let sigma = s1.boxed().with(horn.clone());
                let kb = k_box(tr1); // box s1, box Omega^t => box a^t
                // wrap each box(w^t) into (box w)^t
                let mut structural = kb;
                for w in omega.to_vec() {
                    let wt = trans_t(&w)?;
                    structural = l_and1(structural, &Formula::boxed(wt), &angled(&Formula::boxed(w)));
                }
                let ctx = sigma.sum(&trans_t_multiset(&omega.boxed())?);
                let froms: Vec<(Formula, Proof)> = omega
                    .boxed()
                    .to_vec()
                    .iter()
                    .map(|w| (trans_t(w).unwrap(), prove_t_implies_angle(w).unwrap()))
                    .collect();
                let head_angled = angled(&boxed_a);
                let out = self.with_angled_head(structural, &ctx, &body, &froms, &head_angled);
                Ok((sigma, out))
            }
            "K_dia" => {
                let omega = cv("G");
                let (a, b) = (sv("p"), sv("q"));
                let (s1, tr1) = self.walk(&premises[0])?;
                let dia_a = Formula::dia(a.clone());
                let dia_b = Formula::dia(b.clone());
                let (horn, body) =
                    self.context_implication(node, &omega.boxed(), Some(&dia_a), &dia_b);
                for (e, _) in s1.iter() {
                    let sub = self.parts.get(e).cloned().expect("child part");
                    self.record(&Formula::boxed(e.clone()), || k_box(sub));
                }
                let sigma = s1.boxed().with(horn.clone());
                let at = trans_t(&a)?;
                let kd = k_dia(tr1, &at); // box s1, box Omega^t, dia a^t => dia b^t
                let mut structural = kd;
                for w in omega.to_vec() {
                    let wt = trans_t(&w)?;
                    structural = l_and1(structural, &Formula::boxed(wt), &angled(&Formula::boxed(w)));
                }
                structural = l_and1(structural, &Formula::dia(at), &angled(&dia_a));
                let ctx = sigma
                    .sum(&trans_t_multiset(&omega.boxed())?)
                    .with(trans_t(&dia_a)?);
                let mut froms: Vec<(Formula, Proof)> = omega
                    .boxed()
                    .to_vec()
                    .iter()
                    .map(|w| (trans_t(w).unwrap(), prove_t_implies_angle(w).unwrap()))
                    .collect();
                froms.push((trans_t(&dia_a)?, prove_t_implies_angle(&dia_a)?));
                let head_angled = angled(&dia_b);
                let out = self.with_angled_head(structural, &ctx, &body, &froms, &head_angled);
                Ok((sigma, out))
            }
            name => {
                // an axiom instance `=> C(phi)` from the constructive set
                let schema_formula = self
                    .axioms
                    .get(name)
                    .ok_or_else(|| Error::NotNormalForm(format!("unknown rule `{name}`")))?
                    .clone();
                let schema_rule = self.g.rule(name).unwrap();
                let complete = subst.completed_for(&schema_rule.atoms());
                let args: BTreeMap<Formula, Formula> = schema_formula
                    .atoms()
                    .into_iter()
                    .map(|at| {
                        let v = complete.atom_value(&at).cloned().unwrap_or_else(|| at.clone());
                        (at, v)
                    })
                    .collect();
                let res = commute(CommuteClass::Constructive, &schema_formula, &args)?;
                let inst = node.conclusion.succedent_formula().expect("axiom conclusion").clone();
                let ang_inst = angled(&inst);
                let sigma = res.horns.with(ang_inst.clone());
                for (e, p) in &res.sigma_parts {
                    let p = p.clone();
                    self.record(e, || p);
                }
                let node_clone = node.clone();
                self.record(&ang_inst, move || node_clone);
                // axiom instance over translated arguments
                let subst_t = complete.map_values(|v| crate::translate::trans_t(v).expect("plain"));
                let translated_args = schema_rule
                    .instantiate(&subst_t)
                    .expect("axiom instance")
                    .1;
                let ax_node = Proof::rule_app(name, subst_t, vec![], translated_args);
                let backward = res.backward.expect("constructive commute");
                let out = cut_replace(
                    backward,
                    ax_node.conclusion.succedent_formula().unwrap(),
                    ax_node.clone(),
                );
                debug_assert_eq!(out.conclusion, Sequent::to(sigma.clone(), trans_t(&inst)?));
                Ok((sigma, out))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::add_axioms;
    use crate::catalog::{axiom, builtin};
    use crate::formula::Substitution;
    use crate::classify::is_modal_horn;
    use crate::combinator::{ax_r_top, r_or1};
    use crate::formula::Node;
    use crate::parse::parse_formula;

    fn f(text: &str) -> Formula {
        parse_formula(text, crate::formula::LanguageTag::FullPlus).unwrap()
    }

    fn run(g: &Calculus, proof: &Proof) -> PreservationResult {
        let res = preserve(g, proof).unwrap();
        // both outputs check
        let v = check_proof(g, &res.translated, &[]);
        assert!(v.is_valid(), "translated: {v}");
        let v = check_proof(g, &res.discharge, &[]);
        assert!(v.is_valid(), "discharge: {v}");
        // sigma members are modal Horn over angled atoms
        for e in res.sigma_pi.iter_flat() {
            assert!(is_modal_horn(e), "{e}");
            for at in e.atoms() {
                assert!(matches!(at.node(), Node::Angled(_)), "{e} has a named atom");
            }
        }
        // conclusion shapes
        assert_eq!(
            res.discharge.conclusion,
            Sequent::concl(res.sigma_pi.map(subst_s).big_and())
        );
        res
    }

    #[test]
    fn axiom_instance_case() {
        let ck = builtin("CK").unwrap();
        let proof = ax_id(&FMultiset::singleton(f("q")), &f("p"));
        let res = run(&ck, &proof);
        assert_eq!(res.sigma_pi, FMultiset::singleton(f("<top>")));
        assert_eq!(
            res.translated.conclusion,
            Sequent::to(
                [f("<top>"), f("<q>"), f("<p>")].into_iter().collect(),
                f("<p>")
            )
        );
    }

    #[test]
    fn r_imp_empty_context_example() {
        // proof of => p -> p via (id); (R_imp): sigma is {<top>, <p -> p>}
        let ck = builtin("CK").unwrap();
        let proof = r_imp(ax_id(&FMultiset::new(), &f("p")), &f("p"), &f("p"));
        let res = run(&ck, &proof);
        assert_eq!(
            res.sigma_pi,
            [f("<top>"), f("<p -> p>")].into_iter().collect::<FMultiset>()
        );
    }

    #[test]
    fn k_dia_case_shape() {
        // Gamma = {g}, premise g, a => a by (id); conclusion box g, dia a => dia a
        let ck = builtin("CK").unwrap();
        let child = ax_id(&FMultiset::singleton(f("g")), &f("a"));
        let proof = k_dia(child, &f("a"));
        let res = run(&ck, &proof);
        // sigma = box {<top>} + the boxed-context implication
        assert!(res.sigma_pi.contains(&Formula::boxed(f("<top>"))));
        assert!(res
            .sigma_pi
            .contains(&f("<box g> & <dia a> -> <dia a>")));
        assert_eq!(res.sigma_pi.cardinality(), 2);
    }

    #[test]
    fn constructive_axiom_case() {
        let ck = builtin("CK").unwrap();
        let g = add_axioms(&ck, &[("T_a".into(), axiom("T_a").unwrap())]).unwrap();
        // instance => box (q | r) -> (q | r)
        let inst = Substitution::new().bind_named("p", f("q | r"));
        let ax_node = crate::combinator::axiom_instance(
            "T_a",
            &axiom("T_a").unwrap(),
            &inst.completed_for(&[f("p")]),
        );
        let res = run(&g, &ax_node);
        assert!(res.sigma_pi.contains(&f("<box (q | r) -> q | r>")));
        // discharge really proves the instance under s
        assert!(check_proof(&g, &res.discharge, &[]).is_valid());
    }

    #[test]
    fn compound_proof_all_rules() {
        // exercise cut, R_and, L_or, weakenings in one proof
        let ck = builtin("CK").unwrap();
        let top_p = ax_r_top(&FMultiset::singleton(f("p")));
        let or_intro = r_or1(top_p, &f("q")); // p => top | q
        let by_cut = {
            // => top ; top => top | q would need different context; use
            // direct weakening instead: p => top | q is enough
            or_intro
        };
        let left = ax_id(&FMultiset::new(), &f("p")); // p => p
        let pair = r_and(
            weaken_antecedent_to(left, &FMultiset::singleton(f("p"))),
            by_cut,
        ); // p => p & (top | q)
        let res = run(&ck, &pair);
        assert_eq!(
            res.translated.conclusion.succedent_formula().unwrap(),
            &trans_t(&f("p & (top | q)")).unwrap()
        );
    }

    #[test]
    fn rejects_non_normal_form_and_bad_proofs() {
        let pll = builtin("PLL").unwrap();
        let pf = ax_r_top(&FMultiset::new());
        assert!(matches!(preserve(&pll, &pf), Err(Error::NotNormalForm(_))));
        let ck = builtin("CK").unwrap();
        let mut bad = ax_id(&FMultiset::new(), &f("p"));
        bad.conclusion = Sequent::concl(f("q"));
        assert!(matches!(preserve(&ck, &bad), Err(Error::ProofInvalid(_))));
        let hyp = Proof::hypothesis(0, Sequent::concl(f("p")));
        assert!(matches!(
            preserve(&ck, &hyp),
            Err(Error::ProofInvalid(_))
        ));
    }
}
