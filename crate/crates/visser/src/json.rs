//! File formats: calculus files (JSON object with meta-sequent texts) and
//! proof files (JSON array of nodes, root last). Proof files referencing a
//! node more than once are rejected as dag-shaped unless expansion is
//! requested, which duplicates shared subtrees.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::{Calculus, RuleSchema};
use crate::error::{Error, Result};
use crate::formula::{FMultiset, Formula, LanguageTag, Sequent, Substitution};
use crate::parse::{parse_formula, parse_meta_sequent, parse_sequent};
use crate::proof::{Justification, Proof};

#[derive(Serialize, Deserialize)]
pub struct CalculusFile {
    pub name: String,
    pub lang: String,
    pub rules: Vec<RuleFile>,
}

#[derive(Serialize, Deserialize)]
pub struct RuleFile {
    pub name: String,
    pub premises: Vec<String>,
    pub conclusion: String,
}

pub fn lang_from_str(s: &str) -> Result<LanguageTag> {
    Ok(match s {
        "full" => LanguageTag::Full,
        "full+" => LanguageTag::FullPlus,
        "box" => LanguageTag::BoxOnly,
        "dia" => LanguageTag::DiamondOnly,
        "prop" => LanguageTag::Propositional,
        other => return Err(Error::BadCalculusFile(format!("unknown language `{other}`"))),
    })
}

pub fn calculus_to_json(g: &Calculus) -> CalculusFile {
    CalculusFile {
        name: g.name.clone(),
        lang: g.lang.to_string(),
        rules: g
            .rules()
            .map(|r| RuleFile {
                name: r.name.to_string(),
                premises: r.premises.iter().map(|m| m.to_string()).collect(),
                conclusion: r.conclusion.to_string(),
            })
            .collect(),
    }
}

pub fn calculus_from_json(file: &CalculusFile) -> Result<Calculus> {
    let lang = lang_from_str(&file.lang)?;
    let mut g = Calculus::new(&file.name, lang);
    // rules range over the full language fragment-wise; parse permissively
    g.lang = LanguageTag::FullPlus;
    for r in &file.rules {
        let premises = r
            .premises
            .iter()
            .map(|m| parse_meta_sequent(m, LanguageTag::FullPlus))
            .collect::<Result<Vec<_>>>()?;
        let conclusion = parse_meta_sequent(&r.conclusion, LanguageTag::FullPlus)?;
        g.add_rule(RuleSchema::new(&r.name, premises, conclusion))?;
    }
    g.lang = lang;
    Ok(g)
}

/// Resolves a calculus argument: a builtin name or a JSON file path.
pub fn load_calculus(spec: &str) -> Result<Calculus> {
    if let Ok(g) = crate::catalog::builtin(spec) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::BadCalculusFile(format!("{spec}: {e}")))?;
    let file: CalculusFile = serde_json::from_str(&text)?;
    calculus_from_json(&file)
}

#[derive(Serialize, Deserialize)]
pub struct ProofNodeFile {
    pub id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyp: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subst: Option<SubstFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<usize>,
    pub conclusion: String,
}

#[derive(Serialize, Deserialize, Default)]
pub struct SubstFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub atoms: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub contexts: BTreeMap<String, Vec<String>>,
}

fn subst_to_json(s: &Substitution) -> SubstFile {
    SubstFile {
        atoms: s.atom_bindings().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        contexts: s
            .context_bindings()
            .map(|(k, v)| (k.to_string(), v.iter_flat().map(|f| f.to_string()).collect()))
            .collect(),
    }
}

fn subst_from_json(s: &SubstFile) -> Result<Substitution> {
    let mut out = Substitution::new();
    for (k, v) in &s.atoms {
        let key = parse_formula(k, LanguageTag::FullPlus)?;
        if !key.is_atomic() {
            return Err(Error::BadProofFile(format!("substitution key `{k}` is not atomic")));
        }
        out = out.bind_atom(key, parse_formula(v, LanguageTag::FullPlus)?);
    }
    for (k, v) in &s.contexts {
        let ms: FMultiset = v
            .iter()
            .map(|t| parse_formula(t, LanguageTag::FullPlus))
            .collect::<Result<FMultiset>>()?;
        out = out.bind_context(k, ms);
    }
    Ok(out)
}

/// Serializes a proof as the node array, children before parents, root
/// last, ids sequential.
pub fn proof_to_json(proof: &Proof) -> Vec<ProofNodeFile> {
    let mut out = Vec::new();
    fn walk(p: &Proof, out: &mut Vec<ProofNodeFile>) -> usize {
        let (rule, hyp, subst, children) = match &p.justification {
            Justification::Hypothesis(i) => (None, Some(*i), None, Vec::new()),
            Justification::RuleApp { rule, subst, premises } => {
                let kids: Vec<usize> = premises.iter().map(|q| walk(q, out)).collect();
                (Some(rule.to_string()), None, Some(subst_to_json(subst)), kids)
            }
        };
        let id = out.len();
        out.push(ProofNodeFile {
            id,
            rule,
            hyp,
            subst,
            children,
            conclusion: p.conclusion.to_string(),
        });
        id
    }
    walk(proof, &mut out);
    out
}

/// Reads the node array back into a tree. With `expand_shared` a node used
/// by several parents is duplicated; otherwise sharing is an error.
pub fn proof_from_json(nodes: &[ProofNodeFile], expand_shared: bool) -> Result<Proof> {
    if nodes.is_empty() {
        return Err(Error::BadProofFile("empty node list".into()));
    }
    let by_id: BTreeMap<usize, &ProofNodeFile> = nodes.iter().map(|n| (n.id, n)).collect();
    if by_id.len() != nodes.len() {
        return Err(Error::BadProofFile("duplicate node ids".into()));
    }
    if !expand_shared {
        let mut used: BTreeMap<usize, usize> = BTreeMap::new();
        for n in nodes {
            for c in &n.children {
                *used.entry(*c).or_insert(0) += 1;
            }
        }
        if let Some((id, _)) = used.iter().find(|(_, &c)| c > 1) {
            return Err(Error::DagProof(*id));
        }
    }
    fn build(
        id: usize,
        by_id: &BTreeMap<usize, &ProofNodeFile>,
        depth: usize,
        on_path: &mut Vec<usize>,
    ) -> Result<Proof> {
        if depth > by_id.len() || on_path.contains(&id) {
            return Err(Error::BadProofFile(format!("cycle through node {id}")));
        }
        let node =
            by_id.get(&id).ok_or_else(|| Error::BadProofFile(format!("missing node {id}")))?;
        let conclusion: Sequent = parse_sequent(&node.conclusion, LanguageTag::FullPlus)?;
        match (&node.rule, node.hyp) {
            (None, Some(h)) => Ok(Proof::hypothesis(h, conclusion)),
            (Some(rule), None) => {
                on_path.push(id);
                let premises = node
                    .children
                    .iter()
                    .map(|c| build(*c, by_id, depth + 1, on_path))
                    .collect::<Result<Vec<_>>>()?;
                on_path.pop();
                let subst = match &node.subst {
                    Some(s) => subst_from_json(s)?,
                    None => Substitution::new(),
                };
                Ok(Proof::rule_app(rule, subst, premises, conclusion))
            }
            _ => Err(Error::BadProofFile(format!(
                "node {id} must have exactly one of `rule` or `hyp`"
            ))),
        }
    }
    let root = nodes.last().unwrap().id;
    build(root, &by_id, 0, &mut Vec::new())
}

pub fn write_proof_file(path: &std::path::Path, proof: &Proof) -> Result<String> {
    let nodes = proof_to_json(proof);
    let text = serde_json::to_string(&nodes)?;
    std::fs::write(path, &text)?;
    Ok(sha256_hex(text.as_bytes()))
}

pub fn read_proof_file(path: &std::path::Path, expand_shared: bool) -> Result<Proof> {
    let text = std::fs::read_to_string(path)?;
    let nodes: Vec<ProofNodeFile> = serde_json::from_str(&text)?;
    proof_from_json(&nodes, expand_shared)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::combinator::{ax_id, r_and};
    use crate::proof::check_proof;

    #[test]
    fn proof_round_trip() {
        let p = Formula::atom("p");
        let left = ax_id(&FMultiset::singleton(p.clone()), &p);
        let right = ax_id(&FMultiset::singleton(p.clone()), &p);
        let proof = r_and(left, right);
        let nodes = proof_to_json(&proof);
        assert_eq!(nodes.len(), 3);
        assert_eq!(nodes.last().unwrap().id, 2);
        let back = proof_from_json(&nodes, false).unwrap();
        assert_eq!(back.conclusion, proof.conclusion);
        let lj = builtin("LJ").unwrap();
        assert!(check_proof(&lj, &back, &[]).is_valid());
    }

    #[test]
    fn dag_rejected_then_expanded() {
        let p = Formula::atom("p");
        let leaf = ax_id(&FMultiset::new(), &p);
        let mut nodes = proof_to_json(&leaf);
        // add a parent using the leaf twice
        nodes.push(ProofNodeFile {
            id: 1,
            rule: Some("R_and".into()),
            hyp: None,
            subst: Some(SubstFile {
                atoms: [
                    ("p".to_string(), "p".to_string()),
                    ("q".to_string(), "p".to_string()),
                ]
                .into_iter()
                .collect(),
                contexts: [("G".to_string(), vec!["p".to_string()])].into_iter().collect(),
            }),
            children: vec![0, 0],
            conclusion: "p => p & p".into(),
        });
        assert!(matches!(proof_from_json(&nodes, false), Err(Error::DagProof(0))));
        let expanded = proof_from_json(&nodes, true).unwrap();
        let lj = builtin("LJ").unwrap();
        assert!(check_proof(&lj, &expanded, &[]).is_valid());
        assert_eq!(expanded.node_count(), 3);
    }

    #[test]
    fn calculus_round_trip() {
        let ck = builtin("CK").unwrap();
        let file = calculus_to_json(&ck);
        let back = calculus_from_json(&file).unwrap();
        assert_eq!(back.rules().count(), ck.rules().count());
        for r in ck.rules() {
            assert!(back.rule(&r.name).unwrap().same_shape(r), "{}", r.name);
        }
        assert_eq!(back.lang, ck.lang);
    }
}
