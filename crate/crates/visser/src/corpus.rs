//! Deterministic scaling families used by the benchmarks and tests.

use crate::calculus::Calculus;
use crate::catalog::builtin;
use crate::combinator::{ax_id, ax_r_top, k_dia, r_and, r_or1};
use crate::error::{Error, Result};
use crate::formula::{FMultiset, Formula};
use crate::proof::Proof;

/// `=> top & top & ... ` with `n` conjunction steps (2n + 1 nodes).
fn nested_and(n: usize) -> Proof {
    let mut p = ax_r_top(&FMultiset::new());
    for _ in 0..n {
        p = r_and(p, ax_r_top(&FMultiset::new()));
    }
    p
}

/// A named proof generator over a builtin calculus.
///
/// - `nested-and`: `=> top & ... & top`, n conjunction steps, in CK.
/// - `nested-and-or`: the extraction ladder `=> (top & ... ) | bot`.
/// - `k-dia-tower`: `dia^n a => dia^n a` through n `K_dia` steps, in CK.
pub fn build_corpus_proof(name: &str, n: usize) -> Result<(Calculus, Proof)> {
    let ck = builtin("CK")?;
    match name {
        "nested-and" => Ok((ck, nested_and(n))),
        "nested-and-or" => Ok((ck, r_or1(nested_and(n), &Formula::bot()))),
        "k-dia-tower" => {
            let a = Formula::atom("a");
            let mut p = ax_id(&FMultiset::new(), &a);
            let mut cur = a;
            for _ in 0..n {
                p = k_dia(p, &cur);
                cur = Formula::dia(cur);
            }
            Ok((ck, p))
        }
        _ => Err(Error::UnknownGenerator(name.to_string())),
    }
}

/// `p0, p0 -> p1, ..., p_{n-1} -> p_n` with target `p_n`: the unit
/// propagation loop walks the whole chain.
pub fn horn_chain(n: usize) -> (FMultiset, Vec<Formula>) {
    let p = |i: usize| Formula::atom(format!("p{i}"));
    let mut gamma = FMultiset::singleton(p(0));
    for i in 0..n {
        gamma.insert(Formula::imp(p(i), p(i + 1)), 1);
    }
    (gamma, vec![p(n)])
}

/// A denser Horn family: `k` chains of length `k` joined by a final clause
/// with a `k`-atom body.
pub fn horn_grid(k: usize) -> (FMultiset, Vec<Formula>) {
    let p = |i: usize, j: usize| Formula::atom(format!("p{i}_{j}"));
    let mut gamma = FMultiset::new();
    let mut last = Vec::new();
    for i in 0..k {
        gamma.insert(p(i, 0), 1);
        for j in 0..k {
            gamma.insert(Formula::imp(p(i, j), p(i, j + 1)), 1);
        }
        last.push(p(i, k));
    }
    gamma.insert(
        Formula::imp(crate::formula::big_and_list(&last), Formula::atom("goal")),
        1,
    );
    (gamma, vec![Formula::atom("goal")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hornsolve::{unit_propagate, UnitPropOutcome};
    use crate::proof::check_proof;

    #[test]
    fn generated_proofs_check() {
        for name in ["nested-and", "nested-and-or", "k-dia-tower"] {
            for n in [0usize, 1, 2, 5] {
                let (g, p) = build_corpus_proof(name, n).unwrap();
                let v = check_proof(&g, &p, &[]);
                assert!(v.is_valid(), "{name}/{n}: {v}");
            }
        }
        assert!(build_corpus_proof("nope", 1).is_err());
    }

    #[test]
    fn nested_and_node_count() {
        let (_, p) = build_corpus_proof("nested-and", 2).unwrap();
        assert_eq!(p.node_count(), 5);
    }

    #[test]
    fn horn_chain_shape_and_validity() {
        let (gamma, targets) = horn_chain(3);
        assert_eq!(gamma.cardinality(), 4);
        match unit_propagate(&gamma, &targets).unwrap() {
            UnitPropOutcome::Found { index, .. } => assert_eq!(index, 0),
            _ => panic!("chain should reach its end"),
        }
        let (gamma, targets) = horn_grid(3);
        match unit_propagate(&gamma, &targets).unwrap() {
            UnitPropOutcome::Found { .. } => {}
            _ => panic!("grid should reach the goal"),
        }
    }
}
