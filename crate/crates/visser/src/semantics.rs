//! One-node constructive Kripke models and T-free/T-full classification.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{Formula, LanguageTag, Node};

/// A constructive Kripke model with a single world. `reflexive` selects the
/// reflexive node frame over the irreflexive one; fallible worlds satisfy
/// everything (the frame definition forces reflexivity and the full
/// valuation on them) and are unused in practice.
#[derive(Debug, Clone)]
pub struct OneNodeModel {
    pub reflexive: bool,
    pub true_atoms: BTreeSet<String>,
    pub fallible: bool,
}

impl OneNodeModel {
    pub fn new(reflexive: bool, true_atoms: impl IntoIterator<Item = String>) -> OneNodeModel {
        OneNodeModel { reflexive, true_atoms: true_atoms.into_iter().collect(), fallible: false }
    }

    pub fn fallible(reflexive: bool) -> Result<OneNodeModel> {
        if !reflexive {
            // R must be serial on F, impossible at an irreflexive node
            return Err(Error::NeitherTClass("fallible world needs a reflexive node".into()));
        }
        Ok(OneNodeModel { reflexive: true, true_atoms: BTreeSet::new(), fallible: true })
    }
}

/// Truth at the single world. Irreflexive node: `box` is vacuously true and
/// `dia` false; reflexive node: both collapse to their argument.
pub fn eval_one_node(f: &Formula, m: &OneNodeModel) -> Result<bool> {
    if m.fallible {
        // the world satisfies every formula, including bot
        if f.contains_angled() {
            return Err(Error::AngledAtomPresent);
        }
        return Ok(true);
    }
    match f.node() {
        Node::Angled(_) => Err(Error::AngledAtomPresent),
        Node::Atom(name) => Ok(m.true_atoms.contains(name.as_ref())),
        Node::Top => Ok(true),
        Node::Bot => Ok(false),
        Node::And(a, b) => Ok(eval_one_node(a, m)? && eval_one_node(b, m)?),
        Node::Or(a, b) => Ok(eval_one_node(a, m)? || eval_one_node(b, m)?),
        Node::Imp(a, b) => Ok(!eval_one_node(a, m)? || eval_one_node(b, m)?),
        Node::Box(a) => {
            if m.reflexive {
                eval_one_node(a, m)
            } else {
                Ok(true)
            }
        }
        Node::Dia(a) => {
            if m.reflexive {
                eval_one_node(a, m)
            } else {
                Ok(false)
            }
        }
    }
}

fn named_atoms(f: &Formula) -> BTreeSet<String> {
    f.atoms()
        .into_iter()
        .filter_map(|a| match a.node() {
            Node::Atom(n) => Some(n.to_string()),
            _ => None,
        })
        .collect()
}

/// Validity in the one-node frame: true under all `2^k` valuations of the
/// formula's atoms. Returns the falsifying valuation when invalid.
pub fn frame_countermodel(f: &Formula, reflexive: bool) -> Result<Option<OneNodeModel>> {
    let atoms: Vec<String> = named_atoms(f).into_iter().collect();
    assert!(atoms.len() < 30, "too many atoms for valuation enumeration");
    for mask in 0u64..(1u64 << atoms.len()) {
        let truth: BTreeSet<String> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect();
        let m = OneNodeModel::new(reflexive, truth);
        if !eval_one_node(f, &m)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

pub fn frame_valid(f: &Formula, reflexive: bool) -> Result<bool> {
    Ok(frame_countermodel(f, reflexive)?.is_none())
}

/// T-classification verdict for a `CK + C`-style axiom set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TClassVerdict {
    TFree,
    TFull,
    Neither { reason: String, failing_axiom: Option<Formula>, valuation: Vec<String> },
}

impl TClassVerdict {
    pub fn is_t_free(&self) -> bool {
        matches!(self, TClassVerdict::TFree)
    }

    pub fn is_t_full(&self) -> bool {
        matches!(self, TClassVerdict::TFull)
    }
}

/// `box x -> x` up to atom renaming.
pub fn matches_t_a(f: &Formula) -> bool {
    // box x -> x, any atom name
    match f.node() {
        Node::Imp(a, b) => match (a.node(), b.node()) {
            (Node::Box(inner), Node::Atom(_)) => inner == b && inner.is_atomic(),
            _ => false,
        },
        _ => false,
    }
}

/// `x -> dia x` up to atom renaming.
pub fn matches_t_b(f: &Formula) -> bool {
    match f.node() {
        Node::Imp(a, b) => match (a.node(), b.node()) {
            (Node::Atom(_), Node::Dia(inner)) => inner == a,
            _ => false,
        },
        _ => false,
    }
}

/// Classifies the axioms `C` of a calculus `CK + C` (or the fragment base
/// plus `C`) as T-free, T-full, or neither, over the given language.
///
/// T-free: every axiom is valid in the irreflexive node frame. T-full:
/// every axiom is valid in the reflexive node frame and the language's
/// T-axioms occur, up to atom renaming, in the set (`T_a` and `T_b` over
/// the full language, `T_a` over the box fragment, `T_b` over the diamond
/// fragment). Derivability beyond membership is not attempted.
pub fn classify_tness(cset: &[Formula], lang: LanguageTag) -> Result<TClassVerdict> {
    let mut irr_failure: Option<(Formula, OneNodeModel)> = None;
    for ax in cset {
        if let Some(cm) = frame_countermodel(ax, false)? {
            irr_failure = Some((ax.clone(), cm));
            break;
        }
    }
    if irr_failure.is_none() {
        return Ok(TClassVerdict::TFree);
    }
    for ax in cset {
        if let Some(cm) = frame_countermodel(ax, true)? {
            return Ok(TClassVerdict::Neither {
                reason: format!("axiom `{ax}` fails in the reflexive node frame"),
                failing_axiom: Some(ax.clone()),
                valuation: cm.true_atoms.into_iter().collect(),
            });
        }
    }
    let need_ta = lang.allows_box();
    let need_tb = lang.allows_dia();
    if need_ta && !cset.iter().any(matches_t_a) {
        let (ax, cm) = irr_failure.unwrap();
        return Ok(TClassVerdict::Neither {
            reason: format!(
                "axiom `{ax}` fails in the irreflexive node frame and T_a is not among the axioms"
            ),
            failing_axiom: Some(ax),
            valuation: cm.true_atoms.into_iter().collect(),
        });
    }
    if need_tb && !cset.iter().any(matches_t_b) {
        let (ax, cm) = irr_failure.unwrap();
        return Ok(TClassVerdict::Neither {
            reason: format!(
                "axiom `{ax}` fails in the irreflexive node frame and T_b is not among the axioms"
            ),
            failing_axiom: Some(ax),
            valuation: cm.true_atoms.into_iter().collect(),
        });
    }
    Ok(TClassVerdict::TFull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{axiom, den_axiom, ga_klmn};
    use crate::parse::parse_formula;

    fn f(text: &str) -> Formula {
        parse_formula(text, LanguageTag::FullPlus).unwrap()
    }

    fn irr() -> OneNodeModel {
        OneNodeModel::new(false, [])
    }

    fn refl(atoms: &[&str]) -> OneNodeModel {
        OneNodeModel::new(true, atoms.iter().map(|s| s.to_string()))
    }

    #[test]
    fn eval_clauses() {
        assert!(!eval_one_node(&f("dia top"), &irr()).unwrap());
        assert!(eval_one_node(&f("box bot"), &irr()).unwrap());
        assert!(eval_one_node(&f("box p"), &irr()).unwrap());
        assert!(!eval_one_node(&f("dia p"), &refl(&[])).unwrap());
        assert!(eval_one_node(&f("dia p"), &refl(&["p"])).unwrap());
        assert!(eval_one_node(&f("p -> p"), &irr()).unwrap());
        assert!(matches!(eval_one_node(&f("<p>"), &irr()), Err(Error::AngledAtomPresent)));
    }

    #[test]
    fn reflexive_collapse_property() {
        for text in ["p & q", "box p", "dia (p | ~q)", "box (p -> q)"] {
            let g = f(text);
            for m in [refl(&[]), refl(&["p"]), refl(&["p", "q"])] {
                let v = eval_one_node(&g, &m).unwrap();
                assert_eq!(eval_one_node(&Formula::boxed(g.clone()), &m).unwrap(), v);
                assert_eq!(eval_one_node(&Formula::dia(g.clone()), &m).unwrap(), v);
            }
        }
    }

    #[test]
    fn irreflexive_box_dia_constants() {
        for text in ["p", "bot", "p -> q", "dia p"] {
            let g = f(text);
            assert!(eval_one_node(&Formula::boxed(g.clone()), &irr()).unwrap());
            assert!(!eval_one_node(&Formula::dia(g), &irr()).unwrap());
        }
    }

    #[test]
    fn frame_validity_examples() {
        // ga_{klmn} with k != 0 or m != 0 is valid at the irreflexive node
        for (k, l, m, n) in [(1, 0, 0, 0), (0, 0, 1, 0), (1, 1, 1, 1), (2, 0, 1, 3)] {
            assert!(frame_valid(&ga_klmn(k, l, m, n), false).unwrap(), "ga_{k}{l}{m}{n}");
        }
        // and always valid at the reflexive node
        for (k, l, m, n) in [(0, 0, 0, 0), (1, 2, 3, 4), (0, 1, 0, 1)] {
            assert!(frame_valid(&ga_klmn(k, l, m, n), true).unwrap());
        }
        // D fails at the irreflexive node
        assert!(!frame_valid(&axiom("D").unwrap(), false).unwrap());
        assert!(frame_valid(&Formula::top(), false).unwrap());
        assert!(frame_valid(&Formula::top(), true).unwrap());
        // ga_{0,l,0,n} is the excluded case: box^l p -> dia^n p
        assert!(!frame_valid(&ga_klmn(0, 1, 0, 1), false).unwrap());
    }

    #[test]
    fn fallible_world() {
        let m = OneNodeModel::fallible(true).unwrap();
        assert!(eval_one_node(&f("bot"), &m).unwrap());
        assert!(eval_one_node(&f("box p & dia q"), &m).unwrap());
        assert!(OneNodeModel::fallible(false).is_err());
    }

    #[test]
    fn tness_examples() {
        // CK + ga is T-free
        let v = classify_tness(&[axiom("ga").unwrap()], LanguageTag::Full).unwrap();
        assert_eq!(v, TClassVerdict::TFree);
        // CKT4-style set is T-full
        let cset: Vec<Formula> =
            ["T_a", "T_b", "4_a", "4_b"].iter().map(|n| axiom(n).unwrap()).collect();
        assert!(classify_tness(&cset, LanguageTag::Full).unwrap().is_t_full());
        // CK + D is neither
        let v = classify_tness(&[axiom("D").unwrap()], LanguageTag::Full).unwrap();
        assert!(matches!(v, TClassVerdict::Neither { .. }));
        // reflexive-valid but missing T_a: den_0 axioms
        let v = classify_tness(&[den_axiom(0, false)], LanguageTag::Full).unwrap();
        assert!(matches!(v, TClassVerdict::Neither { .. }));
        // fragment-appropriate subset: T_b alone suffices over the diamond
        // fragment but not over the full language
        let pll_like = vec![axiom("T_b").unwrap(), axiom("4_b").unwrap()];
        assert!(classify_tness(&pll_like, LanguageTag::DiamondOnly).unwrap().is_t_full());
        assert!(matches!(
            classify_tness(&pll_like, LanguageTag::Full).unwrap(),
            TClassVerdict::Neither { .. }
        ));
        // empty set is T-free
        assert!(classify_tness(&[], LanguageTag::Full).unwrap().is_t_free());
    }

    #[test]
    fn catalog_t_free_axioms() {
        // the non-excluded named axioms are valid at the irreflexive node
        for name in ["ga", "4_a", "4_b", "5_a", "5_b", "B_a", "B_b", "dot2", "d_1", "d_2", "d_3",
            "H", "dir", "dia_bot", "dia_or", "box_imp", "M_imp_dia", "c_a", "c_b"]
        {
            assert!(
                frame_valid(&axiom(name).unwrap(), false).unwrap(),
                "{name} should be irreflexive-valid"
            );
        }
        for n in 1..4usize {
            assert!(frame_valid(&den_axiom(n, false), false).unwrap());
            assert!(frame_valid(&den_axiom(n, true), false).unwrap());
        }
        // the excluded list fails at the irreflexive node
        for name in ["T_a", "T_b", "D", "D_a", "D_b"] {
            assert!(
                !frame_valid(&axiom(name).unwrap(), false).unwrap(),
                "{name} should fail at the irreflexive node"
            );
        }
        assert!(!frame_valid(&den_axiom(0, false), false).unwrap());
        assert!(!frame_valid(&den_axiom(0, true), false).unwrap());
    }
}
