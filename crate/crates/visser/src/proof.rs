//! Proof trees and the checking kernel.
//!
//! A proof is a tree of sequents, each justified as a hypothesis (index
//! into an explicit assumption list) or as an instance of a named rule via
//! a stored substitution. Checking re-instantiates each rule and compares
//! multisets, so it is linear in the proof size and needs no search.

use std::fmt;
use std::sync::Arc;

use crate::calculus::Calculus;
use crate::formula::{Formula, Sequent, Substitution};

/// Why a node is accepted.
#[derive(Clone, Debug)]
pub enum Justification {
    /// Premise `i` of the surrounding deduction.
    Hypothesis(usize),
    /// An instance of `rule` under `subst`, with one subproof per premise.
    RuleApp { rule: Arc<str>, subst: Substitution, premises: Vec<Proof> },
}

/// A tree-like proof. Every node has exactly one parent; sharing a subproof
/// means duplicating it, which keeps the size/cost model honest.
#[derive(Clone, Debug)]
pub struct Proof {
    pub conclusion: Sequent,
    pub justification: Justification,
}

impl Proof {
    pub fn hypothesis(index: usize, conclusion: Sequent) -> Proof {
        Proof { conclusion, justification: Justification::Hypothesis(index) }
    }

    pub fn rule_app(rule: &str, subst: Substitution, premises: Vec<Proof>, conclusion: Sequent) -> Proof {
        Proof {
            conclusion,
            justification: Justification::RuleApp { rule: Arc::from(rule), subst, premises },
        }
    }

    pub fn premises(&self) -> &[Proof] {
        match &self.justification {
            Justification::Hypothesis(_) => &[],
            Justification::RuleApp { premises, .. } => premises,
        }
    }

    /// Symbol count: the sum of all node conclusion sizes, so that
    /// `|pi| = sum |pi_i| + |conclusion|` holds on the nose.
    pub fn size(&self) -> u64 {
        let mut total = 0u64;
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            total += p.conclusion.size();
            stack.extend(p.premises());
        }
        total
    }

    pub fn node_count(&self) -> u64 {
        let mut total = 0u64;
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            total += 1;
            stack.extend(p.premises());
        }
        total
    }

    /// Applies a formula transformation to every sequent and to every
    /// substitution value in the tree. When `f` is a substitution (such as
    /// the standard substitution), rule instances map to rule instances, so
    /// the result of a checked proof checks again.
    pub fn map_formulas(&self, f: &impl Fn(&Formula) -> Formula) -> Proof {
        let conclusion = self.conclusion.map(|x| f(x));
        let justification = match &self.justification {
            Justification::Hypothesis(i) => Justification::Hypothesis(*i),
            Justification::RuleApp { rule, subst, premises } => Justification::RuleApp {
                rule: rule.clone(),
                subst: subst.map_values(|x| f(x)),
                premises: premises.iter().map(|p| p.map_formulas(f)).collect(),
            },
        };
        Proof { conclusion, justification }
    }

    /// Replaces hypothesis leaves by the given proofs. Panics if an index is
    /// out of range or a conclusion does not match; callers pass deductions
    /// built for exactly these premises.
    pub fn graft(&self, subs: &[Proof]) -> Proof {
        match &self.justification {
            Justification::Hypothesis(i) => {
                let sub = &subs[*i];
                assert_eq!(
                    sub.conclusion, self.conclusion,
                    "grafted proof concludes {} instead of {}",
                    sub.conclusion, self.conclusion
                );
                sub.clone()
            }
            Justification::RuleApp { rule, subst, premises } => Proof {
                conclusion: self.conclusion.clone(),
                justification: Justification::RuleApp {
                    rule: rule.clone(),
                    subst: subst.clone(),
                    premises: premises.iter().map(|p| p.graft(subs)).collect(),
                },
            },
        }
    }

    /// Renumbers hypothesis indices.
    pub fn shift_hypotheses(&self, offset: usize) -> Proof {
        match &self.justification {
            Justification::Hypothesis(i) => Proof::hypothesis(i + offset, self.conclusion.clone()),
            Justification::RuleApp { rule, subst, premises } => Proof {
                conclusion: self.conclusion.clone(),
                justification: Justification::RuleApp {
                    rule: rule.clone(),
                    subst: subst.clone(),
                    premises: premises.iter().map(|p| p.shift_hypotheses(offset)).collect(),
                },
            },
        }
    }
}

/// Checker outcome. `Invalid` carries the path of child indices from the
/// root to the offending node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid { path: Vec<usize>, reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "Valid"),
            Verdict::Invalid { path, reason } => {
                write!(f, "Invalid at node ")?;
                if path.is_empty() {
                    write!(f, "<root>")?;
                } else {
                    let s: Vec<String> = path.iter().map(|i| i.to_string()).collect();
                    write!(f, "{}", s.join("."))?;
                }
                write!(f, ": {reason}")
            }
        }
    }
}

/// Checks `proof` against `g` and the assumption list. Valid iff every node
/// either matches an assumption or is a correct instantiation of a named
/// rule whose instantiated premises equal the children's conclusions.
pub fn check_proof(g: &Calculus, proof: &Proof, assumptions: &[Sequent]) -> Verdict {
    // Explicit stack; proofs can be deep (long cut chains).
    let mut stack: Vec<(&Proof, Vec<usize>)> = vec![(proof, Vec::new())];
    while let Some((node, path)) = stack.pop() {
        let fail = |reason: String| Verdict::Invalid { path: path.clone(), reason };
        match &node.justification {
            Justification::Hypothesis(i) => {
                match assumptions.get(*i) {
                    None => return fail(format!("hypothesis index {i} out of range")),
                    Some(s) if *s != node.conclusion => {
                        return fail(format!(
                            "hypothesis {i} is `{s}`, node concludes `{}`",
                            node.conclusion
                        ))
                    }
                    Some(_) => {}
                }
            }
            Justification::RuleApp { rule, subst, premises } => {
                let schema = match g.rule(rule) {
                    Some(s) => s,
                    None => return fail(format!("unknown rule `{rule}`")),
                };
                let (inst_prems, inst_concl) = match schema.instantiate(subst) {
                    Ok(x) => x,
                    Err(e) => return fail(format!("cannot instantiate `{rule}`: {e}")),
                };
                if !inst_concl.is_single_conclusion() {
                    return fail(format!("instance of `{rule}` is not single-conclusion"));
                }
                if inst_concl != node.conclusion {
                    return fail(format!(
                        "instance of `{rule}` concludes `{inst_concl}`, node has `{}`",
                        node.conclusion
                    ));
                }
                if inst_prems.len() != premises.len() {
                    return fail(format!(
                        "`{rule}` needs {} premises, node has {}",
                        inst_prems.len(),
                        premises.len()
                    ));
                }
                for (k, (want, sub)) in inst_prems.iter().zip(premises.iter()).enumerate() {
                    if *want != sub.conclusion {
                        return fail(format!(
                            "premise {k} of `{rule}` must be `{want}`, subproof concludes `{}`",
                            sub.conclusion
                        ));
                    }
                    let mut p = path.clone();
                    p.push(k);
                    stack.push((sub, p));
                }
            }
        }
    }
    Verdict::Valid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::formula::{FMultiset, Substitution};

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn id_proof(ctx: FMultiset, f: Formula) -> Proof {
        let concl = Sequent::to(ctx.with(f.clone()), f.clone());
        Proof::rule_app(
            "id",
            Substitution::new().bind_context("G", ctx).bind_named("p", f),
            vec![],
            concl,
        )
    }

    #[test]
    fn one_node_id_is_valid() {
        let lj = builtin("LJ").unwrap();
        let proof = id_proof(FMultiset::new(), p());
        assert!(check_proof(&lj, &proof, &[]).is_valid());
    }

    #[test]
    fn id_with_wrong_conclusion_is_invalid() {
        let lj = builtin("LJ").unwrap();
        let mut proof = id_proof(FMultiset::new(), p());
        proof.conclusion = Sequent::to(FMultiset::singleton(p()), Formula::atom("q"));
        let v = check_proof(&lj, &proof, &[]);
        assert!(!v.is_valid());
        match v {
            Verdict::Invalid { path, .. } => assert!(path.is_empty()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn k_box_missing_box_is_invalid() {
        let ck = builtin("CK").unwrap();
        // Child proves p, q => p but the conclusion forgets one box.
        let ctx: FMultiset = [p(), Formula::atom("q")].into_iter().collect();
        let child = id_proof(FMultiset::singleton(Formula::atom("q")), p());
        let bad_concl = Sequent::to(
            [Formula::boxed(p()), Formula::atom("q")].into_iter().collect(),
            Formula::boxed(p()),
        );
        let bad = Proof::rule_app(
            "K_box",
            Substitution::new().bind_context("G", ctx).bind_named("p", p()),
            vec![child],
            bad_concl,
        );
        assert!(!check_proof(&ck, &bad, &[]).is_valid());
    }

    #[test]
    fn hypotheses_check_against_assumptions() {
        let lj = builtin("LJ").unwrap();
        let s = Sequent::to(FMultiset::singleton(p()), Formula::atom("q"));
        let proof = Proof::hypothesis(0, s.clone());
        assert!(check_proof(&lj, &proof, &[s.clone()]).is_valid());
        assert!(!check_proof(&lj, &proof, &[]).is_valid());
        let other = Sequent::to(FMultiset::new(), Formula::atom("q"));
        assert!(!check_proof(&lj, &proof, &[other]).is_valid());
    }

    #[test]
    fn proof_size_identity() {
        let lj = builtin("LJ").unwrap();
        let base = id_proof(FMultiset::new(), p());
        let imp = Proof::rule_app(
            "R_imp",
            Substitution::new()
                .bind_context("G", FMultiset::new())
                .bind_named("p", p())
                .bind_named("q", p()),
            vec![base.clone()],
            Sequent::concl(Formula::imp(p(), p())),
        );
        assert!(check_proof(&lj, &imp, &[]).is_valid());
        assert_eq!(imp.size(), base.size() + imp.conclusion.size());
    }
}
