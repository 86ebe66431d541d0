//! Builtin calculi and the axiom/rule catalog.
//!
//! LJ is the single-conclusion sequent calculus with explicit cut; CK adds
//! the modal rules K_box and K_dia, CK_box only K_box, BLL adds dia_L, and
//! PLL extends BLL with the T_b and 4_b axioms. IK is CK plus the dia_bot,
//! dia_or, and box_imp axioms. Names like `CKT4` or `IKT45` extend the base
//! with the (a) and (b) versions of the listed axioms.

use crate::calculus::{add_axioms, Calculus, RuleSchema};
use crate::error::{Error, Result};
use crate::formula::{big_and_list, big_or_list, Formula, LanguageTag};
use crate::parse::parse_meta_sequent;

fn rule(name: &str, premises: &[&str], conclusion: &str) -> RuleSchema {
    let lang = LanguageTag::Full;
    RuleSchema::new(
        name,
        premises.iter().map(|p| parse_meta_sequent(p, lang).expect("catalog premise")).collect(),
        parse_meta_sequent(conclusion, lang).expect("catalog conclusion"),
    )
}

/// The fifteen LJ schemas.
pub fn lj_rules() -> Vec<RuleSchema> {
    vec![
        rule("id", &[], "G ; p => p"),
        rule("L_bot", &[], "G ; bot => D"),
        rule("R_top", &[], "G => top"),
        rule("L_w", &["G => D"], "G ; p => D"),
        rule("R_w", &["G =>"], "G => p"),
        rule("L_c", &["G ; p, p => D"], "G ; p => D"),
        rule("cut", &["G => p", "G ; p => D"], "G => D"),
        rule("L_and1", &["G ; p => D"], "G ; p & q => D"),
        rule("L_and2", &["G ; q => D"], "G ; p & q => D"),
        rule("R_and", &["G => p", "G => q"], "G => p & q"),
        rule("L_or", &["G ; p => D", "G ; q => D"], "G ; p | q => D"),
        rule("R_or1", &["G => p"], "G => p | q"),
        rule("R_or2", &["G => q"], "G => p | q"),
        rule("L_imp", &["G => p", "G ; q => D"], "G ; p -> q => D"),
        rule("R_imp", &["G ; p => q"], "G => p -> q"),
    ]
}

pub fn k_box_rule() -> RuleSchema {
    rule("K_box", &["G => p"], "box G => box p")
}

pub fn k_dia_rule() -> RuleSchema {
    rule("K_dia", &["G ; p => q"], "box G ; dia p => dia q")
}

pub fn dia_l_rule() -> RuleSchema {
    rule("dia_L", &["G ; p => q"], "G ; dia p => dia q")
}

fn p() -> Formula {
    Formula::atom("p")
}

fn q() -> Formula {
    Formula::atom("q")
}

/// A named axiom from the modal axiom table, `None` if unknown.
/// Parameterized families are exposed separately.
pub fn axiom(name: &str) -> Option<Formula> {
    let f = match name {
        "K_a" => Formula::imp(
            Formula::boxed(Formula::imp(p(), q())),
            Formula::imp(Formula::boxed(p()), Formula::boxed(q())),
        ),
        "K_b" => Formula::imp(
            Formula::boxed(Formula::imp(p(), q())),
            Formula::imp(Formula::dia(p()), Formula::dia(q())),
        ),
        "dia_bot" => Formula::neg(Formula::dia(Formula::bot())),
        "dia_or" => Formula::imp(
            Formula::dia(Formula::or(p(), q())),
            Formula::or(Formula::dia(p()), Formula::dia(q())),
        ),
        "box_imp" => Formula::imp(
            Formula::imp(Formula::dia(p()), Formula::boxed(q())),
            Formula::boxed(Formula::imp(p(), q())),
        ),
        "D" => Formula::imp(Formula::boxed(p()), Formula::dia(p())),
        "D_a" => Formula::imp(Formula::boxed(Formula::bot()), Formula::bot()),
        "D_b" => Formula::imp(Formula::top(), Formula::dia(Formula::top())),
        "T_a" => Formula::imp(Formula::boxed(p()), p()),
        "T_b" => Formula::imp(p(), Formula::dia(p())),
        "4_a" => Formula::imp(Formula::boxed(p()), Formula::boxed(Formula::boxed(p()))),
        "4_b" => Formula::imp(Formula::dia(Formula::dia(p())), Formula::dia(p())),
        "B_a" => Formula::imp(Formula::dia(Formula::boxed(p())), p()),
        "B_b" => Formula::imp(p(), Formula::boxed(Formula::dia(p()))),
        "5_a" => Formula::imp(Formula::dia(Formula::boxed(p())), Formula::boxed(p())),
        "5_b" => Formula::imp(Formula::dia(p()), Formula::boxed(Formula::dia(p()))),
        "c_a" => Formula::imp(p(), Formula::boxed(p())),
        "c_b" => Formula::imp(Formula::dia(p()), p()),
        "ga" => Formula::imp(
            Formula::dia(Formula::boxed(p())),
            Formula::boxed(Formula::dia(p())),
        ),
        "dot2" => Formula::imp(
            Formula::dia(Formula::and(p(), Formula::boxed(q()))),
            Formula::boxed(Formula::or(p(), Formula::dia(q()))),
        ),
        "d_1" => Formula::imp(Formula::neg(Formula::dia(p())), Formula::boxed(Formula::neg(p()))),
        "d_2" => Formula::imp(Formula::boxed(Formula::neg(p())), Formula::neg(Formula::dia(p()))),
        "d_3" => Formula::imp(Formula::dia(Formula::neg(p())), Formula::neg(Formula::boxed(p()))),
        "H" => Formula::imp(p(), Formula::boxed(Formula::imp(Formula::dia(p()), p()))),
        "dir" => Formula::imp(
            Formula::dia(Formula::and(Formula::boxed(p()), q())),
            Formula::boxed(Formula::or(Formula::dia(p()), q())),
        ),
        "M_imp_dia" => Formula::imp(
            Formula::imp(p(), q()),
            Formula::imp(Formula::dia(p()), Formula::dia(q())),
        ),
        _ => return None,
    };
    Some(f)
}

/// `ga_{klmn}: dia^k box^l p -> box^m dia^n p`.
pub fn ga_klmn(k: usize, l: usize, m: usize, n: usize) -> Formula {
    Formula::imp(
        Formula::dia_n(Formula::boxed_n(p(), l), k),
        Formula::boxed_n(Formula::dia_n(p(), n), m),
    )
}

/// `den_{n,a}: box^{n+1} p -> box^n p` and `den_{n,b}: dia^n p -> dia^{n+1} p`.
pub fn den_axiom(n: usize, b_version: bool) -> Formula {
    if b_version {
        Formula::imp(Formula::dia_n(p(), n), Formula::dia_n(p(), n + 1))
    } else {
        Formula::imp(Formula::boxed_n(p(), n + 1), Formula::boxed_n(p(), n))
    }
}

/// `4_{n,m,a}: box^n p -> box^m p` and `4_{n,m,b}: dia^m p -> dia^n p`, `n < m`.
pub fn four_nm_axiom(n: usize, m: usize, b_version: bool) -> Formula {
    if b_version {
        Formula::imp(Formula::dia_n(p(), m), Formula::dia_n(p(), n))
    } else {
        Formula::imp(Formula::boxed_n(p(), n), Formula::boxed_n(p(), m))
    }
}

/// `tra_{n,a}: /\_{i<=n} box^i p -> box^{n+1} p` and
/// `tra_{n,b}: dia^{n+1} p -> \/_{i<=n} dia^i p`.
pub fn tra_axiom(n: usize, b_version: bool) -> Formula {
    if b_version {
        let ds: Vec<Formula> = (0..=n).map(|i| Formula::dia_n(p(), i)).collect();
        Formula::imp(Formula::dia_n(p(), n + 1), big_or_list(&ds))
    } else {
        let bs: Vec<Formula> = (1..=n).map(|i| Formula::boxed_n(p(), i)).collect();
        Formula::imp(big_and_list(&bs), Formula::boxed_n(p(), n + 1))
    }
}

/// `bd_n`, recursively `bd_0 = bot`, `bd_{n+1} = p_n | box (dia ~p_n | bd_n)`.
pub fn bd_formula(n: usize) -> Formula {
    let mut f = Formula::bot();
    for i in 0..n {
        let pi = Formula::atom(format!("p{i}"));
        f = Formula::or(pi.clone(), Formula::boxed(Formula::or(Formula::dia(Formula::neg(pi)), f)));
    }
    f
}

/// `bd_n` axiom: `dia (box p_n & bd_n) -> p_n`.
pub fn bd_axiom(n: usize) -> Formula {
    let pn = Formula::atom(format!("p{n}"));
    Formula::imp(Formula::dia(Formula::and(Formula::boxed(pn.clone()), bd_formula(n))), pn)
}

/// `bw_r: /\_{i<=r} dia p_i -> \/_{i != j} dia (p_i & (p_j | dia p_j))`, `r >= 1`.
pub fn bw_axiom(r: usize) -> Formula {
    let pi = |i: usize| Formula::atom(format!("p{i}"));
    let body: Vec<Formula> = (0..=r).map(|i| Formula::dia(pi(i))).collect();
    let mut disj = Vec::new();
    for i in 0..=r {
        for j in 0..=r {
            if i != j {
                disj.push(Formula::dia(Formula::and(
                    pi(i),
                    Formula::or(pi(j), Formula::dia(pi(j))),
                )));
            }
        }
    }
    Formula::imp(big_and_list(&body), big_or_list(&disj))
}

fn base_lj() -> Calculus {
    let mut c = Calculus::new("LJ", LanguageTag::Propositional);
    // Rules range over the full language even though the calculus is
    // presented over a fragment; instances are not language-checked.
    c.lang = LanguageTag::Full;
    for r in lj_rules() {
        c.add_rule(r).unwrap();
    }
    c.lang = LanguageTag::Propositional;
    c
}

fn with_modal_rules(name: &str, lang: LanguageTag, extra: Vec<RuleSchema>) -> Calculus {
    let mut c = base_lj();
    c.name = name.to_string();
    let saved = lang;
    c.lang = LanguageTag::Full;
    for r in extra {
        c.add_rule(r).unwrap();
    }
    c.lang = saved;
    c
}

fn letters_to_axioms(base_lang: LanguageTag, letters: &str) -> Result<Vec<(String, Formula)>> {
    let mut out = Vec::new();
    for ch in letters.chars() {
        let names: Vec<&str> = match ch {
            'T' => vec!["T_a", "T_b"],
            'B' => vec!["B_a", "B_b"],
            '4' => vec!["4_a", "4_b"],
            '5' => vec!["5_a", "5_b"],
            _ => return Err(Error::UnknownCalculus(format!("axiom letter `{ch}`"))),
        };
        for n in names {
            let f = axiom(n).unwrap();
            if f.language().within(base_lang) {
                out.push((n.to_string(), f));
            } else if base_lang == LanguageTag::BoxOnly && n.ends_with("_b") {
                // box fragment keeps only the (a) versions
            } else if base_lang == LanguageTag::DiamondOnly && n.ends_with("_a") {
                // dia fragment keeps only the (b) versions
            } else {
                return Err(Error::UnknownCalculus(format!("axiom {n} outside {base_lang}")));
            }
        }
    }
    Ok(out)
}

/// Looks up a builtin calculus by name. Known names: `LJ`, `CK`, `CK_box`,
/// `BLL`, `PLL`, `IK`, `MIPC`, and `CK`/`IK`/`CK_box` followed by a subset
/// of `T`, `B`, `4`, `5` (e.g. `CKT4`, `IKT45`, `CK_boxT4`).
pub fn builtin(name: &str) -> Result<Calculus> {
    match name {
        "LJ" => return Ok(base_lj()),
        "CK" => {
            return Ok(with_modal_rules("CK", LanguageTag::Full, vec![k_box_rule(), k_dia_rule()]))
        }
        "CK_box" => {
            return Ok(with_modal_rules("CK_box", LanguageTag::BoxOnly, vec![k_box_rule()]))
        }
        "BLL" => {
            return Ok(with_modal_rules("BLL", LanguageTag::DiamondOnly, vec![dia_l_rule()]))
        }
        "PLL" => {
            let bll = builtin("BLL")?;
            let mut c = add_axioms(
                &bll,
                &[
                    ("T_b".to_string(), axiom("T_b").unwrap()),
                    ("4_b".to_string(), axiom("4_b").unwrap()),
                ],
            )?;
            c.name = "PLL".into();
            return Ok(c);
        }
        "IK" => {
            let ck = builtin("CK")?;
            let mut c = add_axioms(
                &ck,
                &[
                    ("dia_bot".to_string(), axiom("dia_bot").unwrap()),
                    ("dia_or".to_string(), axiom("dia_or").unwrap()),
                    ("box_imp".to_string(), axiom("box_imp").unwrap()),
                ],
            )?;
            c.name = "IK".into();
            return Ok(c);
        }
        "MIPC" => {
            let ik = builtin("IK")?;
            let mut c = add_axioms(&ik, &letters_to_axioms(LanguageTag::Full, "T45")?)?;
            c.name = "MIPC".into();
            return Ok(c);
        }
        _ => {}
    }
    for (base, lang) in [("CK_box", LanguageTag::BoxOnly), ("CK", LanguageTag::Full), ("IK", LanguageTag::Full)]
    {
        if let Some(letters) = name.strip_prefix(base) {
            if !letters.is_empty() && letters.chars().all(|c| "TB45".contains(c)) {
                let g = builtin(base)?;
                let mut c = add_axioms(&g, &letters_to_axioms(lang, letters)?)?;
                c.name = name.to_string();
                return Ok(c);
            }
        }
    }
    Err(Error::UnknownCalculus(name.to_string()))
}

/// The rule-table counterparts of the axiom catalog (finite sample of the
/// parameterized families). All of them classify as constructive.
pub fn rule_table() -> Vec<RuleSchema> {
    let mut out = vec![
        rule("r_dia_bot", &["G => dia bot"], "G => bot"),
        rule("r_dia_or", &["G => dia (p | q)"], "G => dia p | dia q"),
        rule("r_box_imp", &["G ; dia p => box q"], "G => box (p -> q)"),
        rule("r_D", &["G => box p"], "G => dia p"),
        rule("ax_dia_bot_left", &[], "G ; dia bot => D"),
        rule("ax_box_dia", &[], "G ; box p => dia p"),
        rule("r_dia_or_left", &["G ; dia p => D", "G ; dia q => D"], "G ; dia (p | q) => D"),
        rule("r_T_a", &["G => box p"], "G => p"),
        rule("r_T_b", &["G => p"], "G => dia p"),
        rule("r_4_a", &["G => box p"], "G => box box p"),
        rule("r_4_b", &["G => dia dia p"], "G => dia p"),
        rule("r_B_a", &["G => dia box p"], "G => p"),
        rule("r_B_b", &["G => p"], "G => box dia p"),
        rule("r_5_a", &["G => dia box p"], "G => box p"),
        rule("r_5_b", &["G => dia p"], "G => box dia p"),
        rule("r_ga", &["G => dia box p"], "G => box dia p"),
        rule("r_box_left", &["G ; p => D"], "G ; box p => D"),
        rule("r_box_right", &["G => p"], "G => box p"),
        rule("r_dia_left", &["G ; p => D"], "G ; dia p => D"),
        rule("ax_box_bot_left", &[], "G ; box bot => D"),
        rule("ax_dia_top", &[], "G => dia top"),
        rule("r_dot2", &["G => dia (p & box q)"], "G => box (p | dia q)"),
        rule("r_d1", &["G => ~ dia p"], "G => box ~p"),
        rule("r_d2", &["G => box ~p"], "G => ~ dia p"),
        rule("r_d3", &["G => dia ~p"], "G => ~ box p"),
        rule("r_d1_seq", &["G ; dia p => bot"], "G => box ~p"),
        rule("r_d2_seq", &["G => box ~p"], "G ; dia p => D"),
        rule("r_d3_seq", &["G => dia ~p"], "G ; box p => D"),
        rule("r_H", &["G => p"], "G => box (dia p -> p)"),
        rule("r_dir", &["G => dia (box p & q)"], "G => box (dia p | q)"),
    ];
    for n in 0..3usize {
        out.push(RuleSchema::new(
            &format!("r_den_{n}_a"),
            vec![parse_meta_sequent(
                &format!("G => {}p", "box ".repeat(n + 1)),
                LanguageTag::Full,
            )
            .unwrap()],
            parse_meta_sequent(&format!("G => {}p", "box ".repeat(n)), LanguageTag::Full).unwrap(),
        ));
        out.push(RuleSchema::new(
            &format!("r_den_{n}_b"),
            vec![parse_meta_sequent(&format!("G => {}p", "dia ".repeat(n)), LanguageTag::Full)
                .unwrap()],
            parse_meta_sequent(&format!("G => {}p", "dia ".repeat(n + 1)), LanguageTag::Full)
                .unwrap(),
        ));
        // tra_{n,a} and tra_{n,b}
        let prems: Vec<crate::calculus::MetaSequent> = (0..=n)
            .map(|i| {
                parse_meta_sequent(&format!("G => {}p", "box ".repeat(i)), LanguageTag::Full)
                    .unwrap()
            })
            .collect();
        out.push(RuleSchema::new(
            &format!("r_tra_{n}_a"),
            prems,
            parse_meta_sequent(&format!("G => {}p", "box ".repeat(n + 1)), LanguageTag::Full)
                .unwrap(),
        ));
        let ds: Vec<Formula> = (0..=n).map(|i| Formula::dia_n(p(), i)).collect();
        out.push(RuleSchema::new(
            &format!("r_tra_{n}_b"),
            vec![parse_meta_sequent(&format!("G => {}p", "dia ".repeat(n + 1)), LanguageTag::Full)
                .unwrap()],
            crate::calculus::MetaSequent::new(
                vec![crate::calculus::ContextSlot::plain("G")],
                crate::formula::FMultiset::new(),
                crate::calculus::MetaSuccedent::Formulas(crate::formula::FMultiset::singleton(
                    big_or_list(&ds),
                )),
            ),
        ));
        // dia^{n+1} left decomposition
        let prems: Vec<crate::calculus::MetaSequent> = (0..=n)
            .map(|i| {
                parse_meta_sequent(&format!("G ; {}p => D", "dia ".repeat(i)), LanguageTag::Full)
                    .unwrap()
            })
            .collect();
        out.push(RuleSchema::new(
            &format!("r_tra_{n}_left"),
            prems,
            parse_meta_sequent(&format!("G ; {}p => D", "dia ".repeat(n + 1)), LanguageTag::Full)
                .unwrap(),
        ));
    }
    for (k, l, m, n) in [(1usize, 0usize, 0usize, 1usize), (1, 1, 1, 1), (0, 1, 2, 0), (2, 1, 0, 2)] {
        out.push(RuleSchema::new(
            &format!("r_ga_{k}{l}{m}{n}"),
            vec![parse_meta_sequent(
                &format!("G => {}{}p", "dia ".repeat(k), "box ".repeat(l)),
                LanguageTag::Full,
            )
            .unwrap()],
            parse_meta_sequent(
                &format!("G => {}{}p", "box ".repeat(m), "dia ".repeat(n)),
                LanguageTag::Full,
            )
            .unwrap(),
        ));
    }
    for r in 1..=2usize {
        let pi = |i: usize| Formula::atom(format!("p{i}"));
        let mut prems = Vec::new();
        for i in 0..=r {
            for j in 0..=r {
                if i != j {
                    let f = Formula::dia(Formula::and(pi(i), Formula::or(pi(j), Formula::dia(pi(j)))));
                    prems.push(crate::calculus::MetaSequent::new(
                        vec![crate::calculus::ContextSlot::plain("G")],
                        crate::formula::FMultiset::singleton(f),
                        crate::calculus::MetaSuccedent::Var(std::sync::Arc::from("D")),
                    ));
                }
            }
        }
        let concl_ant: crate::formula::FMultiset = (0..=r).map(|i| Formula::dia(pi(i))).collect();
        out.push(RuleSchema::new(
            &format!("r_bw_{r}"),
            prems,
            crate::calculus::MetaSequent::new(
                vec![crate::calculus::ContextSlot::plain("G")],
                concl_ant,
                crate::calculus::MetaSuccedent::Var(std::sync::Arc::from("D")),
            ),
        ));
    }
    for n in 0..3usize {
        let pn = Formula::atom(format!("p{n}"));
        out.push(RuleSchema::new(
            &format!("r_bd_{n}"),
            vec![crate::calculus::MetaSequent::new(
                vec![crate::calculus::ContextSlot::plain("G")],
                crate::formula::FMultiset::singleton(pn.clone()),
                crate::calculus::MetaSuccedent::Var(std::sync::Arc::from("D")),
            )],
            crate::calculus::MetaSequent::new(
                vec![crate::calculus::ContextSlot::plain("G")],
                crate::formula::FMultiset::singleton(Formula::dia(Formula::and(
                    Formula::boxed(pn),
                    bd_formula(n),
                ))),
                crate::calculus::MetaSuccedent::Var(std::sync::Arc::from("D")),
            ),
        ));
    }
    out
}

/// The non-constructive rules used as negative classifier fixtures:
/// excluded middle and its three rule forms, the mixed premise rule, and
/// the named (sc), (ma), (la), (grz), d3-converse, (.1), and modal
/// disjunction axioms.
pub fn non_constructive_rules() -> Vec<RuleSchema> {
    vec![
        rule("ax_em", &[], "G => p | ~p"),
        rule("r_dne", &["G => ~~p"], "G => p"),
        rule("r_raa", &["G ; ~p => bot"], "G => p"),
        rule("r_em_cases", &["G ; p => D", "G ; ~p => D"], "G => D"),
        rule("r_raa_mixed", &["G ; ~p => bot", "G ; p => D"], "G => D"),
        rule(
            "sc",
            &["G ; box (box p -> q) => D", "G ; box (box q -> p) => D"],
            "G => D",
        ),
        rule("ma", &["G => box dia p"], "G => dia box p"),
        rule("la", &["G => box (box p -> p)"], "G => box p"),
        rule("grz", &["G => box (box (p -> box p) -> p)"], "G => p"),
        rule("r_d3_conv", &["G => ~ box p"], "G => dia ~p"),
        rule("dot1", &["G => box dia p", "G => dia p"], "G => dia box p | box p"),
        rule("ax_dia_top_or_box_bot", &[], "G => dia top | box bot"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lj_has_fifteen_schemas() {
        assert_eq!(lj_rules().len(), 15);
        assert_eq!(builtin("LJ").unwrap().rules().count(), 15);
    }

    #[test]
    fn ck_and_friends() {
        let ck = builtin("CK").unwrap();
        assert!(ck.rule("K_box").is_some());
        assert!(ck.rule("K_dia").is_some());
        assert_eq!(ck.rules().count(), 17);

        let pll = builtin("PLL").unwrap();
        assert!(pll.rule("dia_L").is_some());
        assert!(pll.rule("T_b").is_some());
        assert!(pll.rule("4_b").is_some());
        assert!(pll.rule("K_box").is_none());

        let k_dia = builtin("CK").unwrap();
        let k = k_dia.rule("K_dia").unwrap();
        let expect = rule("x", &["G ; p => q"], "box G ; dia p => dia q");
        assert!(k.same_shape(&expect));

        let ckt4 = builtin("CKT4").unwrap();
        for a in ["T_a", "T_b", "4_a", "4_b"] {
            assert!(ckt4.rule(a).is_some());
        }
        let mipc = builtin("MIPC").unwrap();
        for a in ["T_a", "T_b", "4_a", "4_b", "5_a", "5_b", "dia_or", "box_imp", "dia_bot"] {
            assert!(mipc.rule(a).is_some(), "MIPC missing {a}");
        }
        let ckboxt = builtin("CK_boxT4").unwrap();
        assert!(ckboxt.rule("T_a").is_some());
        assert!(ckboxt.rule("T_b").is_none());
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn axiom_catalog() {
        assert_eq!(axiom("T_a").unwrap().to_string(), "box p -> p");
        assert_eq!(ga_klmn(1, 0, 0, 1).to_string(), "dia p -> dia p");
        assert_eq!(
            ga_klmn(2, 1, 1, 0).to_string(),
            "dia dia box p -> box p"
        );
        assert_eq!(den_axiom(0, false).to_string(), "box p -> p");
        assert_eq!(den_axiom(0, true).to_string(), "p -> dia p");
        assert_eq!(bd_formula(0), Formula::bot());
        assert!(bw_axiom(1).size() > 10);
    }
}
