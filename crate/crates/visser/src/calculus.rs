//! Rule schemas, meta-sequents, calculi, and rule instantiation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{apply_subst, FMultiset, Formula, LanguageTag, Sequent, Substitution};

/// A context slot in a meta-sequent antecedent: a multiset variable,
/// optionally under a box.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ContextSlot {
    pub var: Arc<str>,
    pub boxed: bool,
}

impl ContextSlot {
    pub fn plain(var: &str) -> ContextSlot {
        ContextSlot { var: Arc::from(var), boxed: false }
    }

    pub fn boxed(var: &str) -> ContextSlot {
        ContextSlot { var: Arc::from(var), boxed: true }
    }
}

/// Succedent of a meta-sequent: either a multiset variable or concrete
/// (schematic) formulas.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MetaSuccedent {
    Var(Arc<str>),
    Formulas(FMultiset),
}

/// A sequent template. Antecedents may carry context slots (`G`, `box G`)
/// and schematic formulas whose atoms are placeholders; succedents are a
/// context variable or schematic formulas. Boxed slots appear only in
/// antecedents, matching the restricted meta-sequent form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MetaSequent {
    pub contexts: Vec<ContextSlot>,
    pub antecedent: FMultiset,
    pub succedent: MetaSuccedent,
}

impl MetaSequent {
    pub fn new(contexts: Vec<ContextSlot>, antecedent: FMultiset, succedent: MetaSuccedent) -> MetaSequent {
        let mut contexts = contexts;
        contexts.sort();
        MetaSequent { contexts, antecedent, succedent }
    }

    /// Instantiates with `s`; every context variable must be bound.
    pub fn instantiate(&self, s: &Substitution) -> Result<Sequent> {
        let mut ant = self.antecedent.map(|f| apply_subst(f, s));
        for slot in &self.contexts {
            let value = s
                .context_value(&slot.var)
                .ok_or_else(|| Error::UnboundVariable(slot.var.to_string()))?;
            ant = ant.sum(&if slot.boxed { value.boxed() } else { value.clone() });
        }
        let suc = match &self.succedent {
            MetaSuccedent::Var(v) => s
                .context_value(v)
                .ok_or_else(|| Error::UnboundVariable(v.to_string()))?
                .clone(),
            MetaSuccedent::Formulas(fs) => fs.map(|f| apply_subst(f, s)),
        };
        Ok(Sequent::new(ant, suc))
    }

    /// All schematic atoms occurring in the formula parts.
    pub fn atoms(&self) -> Vec<Formula> {
        let mut out = std::collections::BTreeSet::new();
        for f in self.antecedent.iter_flat() {
            out.extend(f.atoms());
        }
        if let MetaSuccedent::Formulas(fs) = &self.succedent {
            for f in fs.iter_flat() {
                out.extend(f.atoms());
            }
        }
        out.into_iter().collect()
    }

    pub fn context_vars(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = self.contexts.iter().map(|c| c.var.clone()).collect();
        if let MetaSuccedent::Var(v) = &self.succedent {
            out.push(v.clone());
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn language(&self) -> LanguageTag {
        let mut lang = LanguageTag::Propositional;
        for f in self.antecedent.iter_flat() {
            lang = lang.join(f.language());
        }
        if let MetaSuccedent::Formulas(fs) = &self.succedent {
            for f in fs.iter_flat() {
                lang = lang.join(f.language());
            }
        }
        for slot in &self.contexts {
            if slot.boxed {
                lang = lang.join(LanguageTag::BoxOnly);
            }
        }
        lang
    }
}

impl fmt::Display for MetaSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .contexts
            .iter()
            .map(|c| if c.boxed { format!("box {}", c.var) } else { c.var.to_string() })
            .collect();
        if !self.antecedent.is_empty() {
            let fs: Vec<String> = self.antecedent.iter_flat().map(|x| x.to_string()).collect();
            parts.push(fs.join(", "));
        }
        let lhs = parts.join(" ; ");
        let rhs = match &self.succedent {
            MetaSuccedent::Var(v) => v.to_string(),
            MetaSuccedent::Formulas(fs) => {
                let v: Vec<String> = fs.iter_flat().map(|x| x.to_string()).collect();
                v.join(", ")
            }
        };
        if lhs.is_empty() {
            write!(f, "=> {rhs}")
        } else if rhs.is_empty() {
            write!(f, "{lhs} =>")
        } else {
            write!(f, "{lhs} => {rhs}")
        }
    }
}

/// A named inference rule: premises and a conclusion, all meta-sequents.
/// A rule with no premises is an axiom.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleSchema {
    pub name: Arc<str>,
    pub premises: Vec<MetaSequent>,
    pub conclusion: MetaSequent,
}

impl RuleSchema {
    pub fn new(name: &str, premises: Vec<MetaSequent>, conclusion: MetaSequent) -> RuleSchema {
        RuleSchema { name: Arc::from(name), premises, conclusion }
    }

    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty()
    }

    /// Instantiated premises and conclusion, in schema order.
    pub fn instantiate(&self, s: &Substitution) -> Result<(Vec<Sequent>, Sequent)> {
        let premises =
            self.premises.iter().map(|m| m.instantiate(s)).collect::<Result<Vec<_>>>()?;
        let conclusion = self.conclusion.instantiate(s)?;
        Ok((premises, conclusion))
    }

    pub fn language(&self) -> LanguageTag {
        self.premises
            .iter()
            .map(|m| m.language())
            .fold(self.conclusion.language(), |a, b| a.join(b))
    }

    /// All schematic atoms of the rule.
    pub fn atoms(&self) -> Vec<Formula> {
        let mut out = std::collections::BTreeSet::new();
        for m in self.premises.iter().chain(std::iter::once(&self.conclusion)) {
            out.extend(m.atoms());
        }
        out.into_iter().collect()
    }

    /// Structural equality up to renaming of context variables.
    pub fn same_shape(&self, other: &RuleSchema) -> bool {
        struct Renamer {
            names: BTreeMap<Arc<str>, Arc<str>>,
        }
        impl Renamer {
            fn get(&mut self, v: &Arc<str>) -> Arc<str> {
                let fresh = self.names.len();
                self.names
                    .entry(v.clone())
                    .or_insert_with(|| Arc::from(format!("V{fresh}").as_str()))
                    .clone()
            }
            fn fix(&mut self, m: &MetaSequent) -> MetaSequent {
                MetaSequent {
                    contexts: m
                        .contexts
                        .iter()
                        .map(|c| ContextSlot { var: self.get(&c.var), boxed: c.boxed })
                        .collect(),
                    antecedent: m.antecedent.clone(),
                    succedent: match &m.succedent {
                        MetaSuccedent::Var(v) => MetaSuccedent::Var(self.get(v)),
                        MetaSuccedent::Formulas(fs) => MetaSuccedent::Formulas(fs.clone()),
                    },
                }
            }
        }
        fn canon(r: &RuleSchema) -> RuleSchema {
            let mut rn = Renamer { names: BTreeMap::new() };
            RuleSchema {
                name: Arc::from(""),
                premises: r.premises.iter().map(|m| rn.fix(m)).collect(),
                conclusion: rn.fix(&r.conclusion),
            }
        }
        canon(self) == canon(other)
    }
}

/// A finite set of rules over a language.
#[derive(Clone, Debug)]
pub struct Calculus {
    pub name: String,
    pub lang: LanguageTag,
    rules: BTreeMap<Arc<str>, RuleSchema>,
}

impl Calculus {
    pub fn new(name: &str, lang: LanguageTag) -> Calculus {
        Calculus { name: name.to_string(), lang, rules: BTreeMap::new() }
    }

    pub fn add_rule(&mut self, rule: RuleSchema) -> Result<()> {
        if !rule.language().within(self.lang) {
            return Err(Error::LanguageViolation {
                connective: format!("rule {}", rule.name),
                lang: self.lang.to_string(),
            });
        }
        self.rules.insert(rule.name.clone(), rule);
        Ok(())
    }

    pub fn rule(&self, name: &str) -> Option<&RuleSchema> {
        self.rules.get(name)
    }

    pub fn rules(&self) -> impl Iterator<Item = &RuleSchema> {
        self.rules.values()
    }

    pub fn has_rule_shaped(&self, shape: &RuleSchema) -> Option<&RuleSchema> {
        self.rules.values().find(|r| r.same_shape(shape))
    }

    /// Zero-premise rules of the form `=> A` (no context slots), i.e. the
    /// calculus' axiom extensions; returns the axiom formulas.
    pub fn plain_axioms(&self) -> Vec<(Arc<str>, Formula)> {
        self.rules
            .values()
            .filter(|r| r.is_axiom() && r.conclusion.contexts.is_empty())
            .filter_map(|r| match &r.conclusion.succedent {
                MetaSuccedent::Formulas(fs) if fs.cardinality() == 1 && r.conclusion.antecedent.is_empty() => {
                    Some((r.name.clone(), fs.iter_flat().next().unwrap().clone()))
                }
                _ => None,
            })
            .collect()
    }
}

/// `G + A`: adds one zero-premise schema `=> A` per axiom. The contexted
/// variant `Gamma => A` is derivable by weakening.
pub fn add_axioms(g: &Calculus, axioms: &[(String, Formula)]) -> Result<Calculus> {
    let mut out = g.clone();
    out.name = format!("{}+", g.name);
    for (name, a) in axioms {
        if !a.language().within(g.lang) {
            return Err(Error::LanguageViolation {
                connective: a.to_string(),
                lang: g.lang.to_string(),
            });
        }
        out.add_rule(axiom_schema(name, a.clone()))?;
        out.name.push_str(name);
        out.name.push(',');
    }
    if out.name.ends_with(',') {
        out.name.pop();
    }
    Ok(out)
}

/// The zero-premise schema `=> A`.
pub fn axiom_schema(name: &str, a: Formula) -> RuleSchema {
    RuleSchema::new(
        name,
        vec![],
        MetaSequent::new(vec![], FMultiset::new(), MetaSuccedent::Formulas(FMultiset::singleton(a))),
    )
}

/// Visser's rule `V_n`.
///
/// For `n >= 1` the premise is
/// `=> (/\_{i<=n} (p_i -> q_i) -> p_{n+1} | p_{n+2}) | r` and the conclusion
/// `=> \/_{j<=n+2} (/\_i (p_i -> q_i) -> p_j) | r`. `V_0` is the
/// disjunction-property marker: premise `=> p1 | p2`, conclusion `=> p1`
/// standing for the admissible either-disjunct outcome.
pub fn visser_rule(n: i64) -> Result<RuleSchema> {
    if n < 0 {
        return Err(Error::NegativeIndex);
    }
    let n = n as usize;
    let p = |i: usize| Formula::atom(format!("p{i}"));
    let q = |i: usize| Formula::atom(format!("q{i}"));
    if n == 0 {
        let prem = MetaSequent::new(
            vec![],
            FMultiset::new(),
            MetaSuccedent::Formulas(FMultiset::singleton(Formula::or(p(1), p(2)))),
        );
        let concl = MetaSequent::new(
            vec![],
            FMultiset::new(),
            MetaSuccedent::Formulas(FMultiset::singleton(p(1))),
        );
        return Ok(RuleSchema::new("V0", vec![prem], concl));
    }
    let imps: Vec<Formula> = (1..=n).map(|i| Formula::imp(p(i), q(i))).collect();
    let conj = crate::formula::big_and_list(&imps);
    let premise_formula = Formula::or(
        Formula::imp(conj.clone(), Formula::or(p(n + 1), p(n + 2))),
        Formula::atom("r"),
    );
    let disjuncts: Vec<Formula> =
        (1..=n + 2).map(|j| Formula::imp(conj.clone(), p(j))).collect();
    let conclusion_formula = Formula::or(crate::formula::big_or_list(&disjuncts), Formula::atom("r"));
    Ok(RuleSchema::new(
        &format!("V{n}"),
        vec![MetaSequent::new(
            vec![],
            FMultiset::new(),
            MetaSuccedent::Formulas(FMultiset::singleton(premise_formula)),
        )],
        MetaSequent::new(
            vec![],
            FMultiset::new(),
            MetaSuccedent::Formulas(FMultiset::singleton(conclusion_formula)),
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::parse::{parse_formula, parse_meta_sequent};

    #[test]
    fn instantiate_k_box() {
        let ck = builtin("CK").unwrap();
        let k = ck.rule("K_box").unwrap();
        let s = Substitution::new()
            .bind_context(
                "G",
                [Formula::atom("p"), Formula::atom("q")].into_iter().collect(),
            )
            .bind_named("p", Formula::atom("r"));
        let (prems, concl) = k.instantiate(&s).unwrap();
        assert_eq!(prems.len(), 1);
        assert_eq!(
            prems[0],
            Sequent::to(
                [Formula::atom("p"), Formula::atom("q")].into_iter().collect(),
                Formula::atom("r")
            )
        );
        assert_eq!(
            concl,
            Sequent::to(
                [
                    Formula::boxed(Formula::atom("p")),
                    Formula::boxed(Formula::atom("q"))
                ]
                .into_iter()
                .collect(),
                Formula::boxed(Formula::atom("r"))
            )
        );
    }

    #[test]
    fn instantiate_id_with_top() {
        let lj = builtin("LJ").unwrap();
        let id = lj.rule("id").unwrap();
        let s = Substitution::new()
            .bind_context("G", FMultiset::new())
            .bind_named("p", Formula::top());
        let (_, concl) = id.instantiate(&s).unwrap();
        assert_eq!(concl, Sequent::to(FMultiset::singleton(Formula::top()), Formula::top()));
    }

    #[test]
    fn instantiate_l_or() {
        let lj = builtin("LJ").unwrap();
        let lor = lj.rule("L_or").unwrap();
        let s = Substitution::new()
            .bind_context("G", FMultiset::singleton(Formula::atom("s")))
            .bind_context("D", FMultiset::singleton(Formula::atom("c")))
            .bind_named("p", Formula::atom("a"))
            .bind_named("q", Formula::atom("b"));
        let (prems, concl) = lor.instantiate(&s).unwrap();
        let g = FMultiset::singleton(Formula::atom("s"));
        assert_eq!(prems[0], Sequent::to(g.with(Formula::atom("a")), Formula::atom("c")));
        assert_eq!(prems[1], Sequent::to(g.with(Formula::atom("b")), Formula::atom("c")));
        assert_eq!(
            concl,
            Sequent::to(
                g.with(Formula::or(Formula::atom("a"), Formula::atom("b"))),
                Formula::atom("c")
            )
        );
    }

    #[test]
    fn unbound_context_is_an_error() {
        let lj = builtin("LJ").unwrap();
        let id = lj.rule("id").unwrap();
        let s = Substitution::new().bind_named("p", Formula::top());
        assert!(matches!(id.instantiate(&s), Err(Error::UnboundVariable(_))));
    }

    #[test]
    fn add_axioms_checks_language() {
        let ckbox = builtin("CK_box").unwrap();
        let dia_ax = parse_formula("~ dia bot", LanguageTag::Full).unwrap();
        assert!(matches!(
            add_axioms(&ckbox, &[("dia_bot".into(), dia_ax)]),
            Err(Error::LanguageViolation { .. })
        ));
        let ck = builtin("CK").unwrap();
        let same = add_axioms(&ck, &[]).unwrap();
        assert_eq!(same.rules().count(), ck.rules().count());
    }

    #[test]
    fn visser_rule_shapes() {
        let v1 = visser_rule(1).unwrap();
        let prem = parse_meta_sequent("=> ((p1 -> q1) -> p2 | p3) | r", LanguageTag::Full).unwrap();
        assert_eq!(v1.premises[0], prem);
        let v2 = visser_rule(2).unwrap();
        if let MetaSuccedent::Formulas(fs) = &v2.conclusion.succedent {
            let f = fs.iter_flat().next().unwrap();
            // 4 implication disjuncts plus r
            let s = f.to_string();
            assert_eq!(s.matches("->").count(), 4 * (2 + 1));
        } else {
            panic!("expected formulas succedent");
        }
        assert!(visser_rule(-1).is_err());
        let v0 = visser_rule(0).unwrap();
        assert_eq!(v0.name.as_ref(), "V0");
    }

    #[test]
    fn same_shape_modulo_renaming() {
        let a = RuleSchema::new(
            "x",
            vec![parse_meta_sequent("G => p", LanguageTag::Full).unwrap()],
            parse_meta_sequent("box G => box p", LanguageTag::Full).unwrap(),
        );
        let b = RuleSchema::new(
            "y",
            vec![parse_meta_sequent("H => p", LanguageTag::Full).unwrap()],
            parse_meta_sequent("box H => box p", LanguageTag::Full).unwrap(),
        );
        assert!(a.same_shape(&b));
        let ck = builtin("CK").unwrap();
        assert!(ck.rule("K_box").unwrap().same_shape(&a));
    }
}
