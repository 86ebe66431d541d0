//! Formulas over the modal language, its fragments, and the extension with
//! angled atoms; finite multisets of formulas; sequents; substitutions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Which connectives a formula or calculus may use.
///
/// `Full` is the modal language {and, or, ->, top, bot, box, dia}; `BoxOnly`
/// drops dia, `DiamondOnly` drops box, `Propositional` drops both, and
/// `FullPlus` is `Full` extended with angled atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LanguageTag {
    Propositional,
    BoxOnly,
    DiamondOnly,
    Full,
    FullPlus,
}

impl LanguageTag {
    pub fn allows_box(self) -> bool {
        matches!(self, LanguageTag::BoxOnly | LanguageTag::Full | LanguageTag::FullPlus)
    }

    pub fn allows_dia(self) -> bool {
        matches!(self, LanguageTag::DiamondOnly | LanguageTag::Full | LanguageTag::FullPlus)
    }

    pub fn allows_angled(self) -> bool {
        matches!(self, LanguageTag::FullPlus)
    }

    /// Sub-language relation: `self` is contained in `other`.
    pub fn within(self, other: LanguageTag) -> bool {
        (!self.allows_box() || other.allows_box())
            && (!self.allows_dia() || other.allows_dia())
            && (!self.allows_angled() || other.allows_angled())
    }

    /// Least language containing both.
    pub fn join(self, other: LanguageTag) -> LanguageTag {
        let b = self.allows_box() || other.allows_box();
        let d = self.allows_dia() || other.allows_dia();
        if self.allows_angled() || other.allows_angled() {
            LanguageTag::FullPlus
        } else {
            match (b, d) {
                (true, true) => LanguageTag::Full,
                (true, false) => LanguageTag::BoxOnly,
                (false, true) => LanguageTag::DiamondOnly,
                (false, false) => LanguageTag::Propositional,
            }
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LanguageTag::Propositional => "prop",
            LanguageTag::BoxOnly => "box",
            LanguageTag::DiamondOnly => "dia",
            LanguageTag::Full => "full",
            LanguageTag::FullPlus => "full+",
        };
        f.write_str(s)
    }
}

/// Shape of a formula node. `Angled` wraps a plain modal formula and behaves
/// as a fresh atom; its payload is opaque to substitution and evaluation.
#[derive(Debug)]
pub enum Node {
    Atom(Arc<str>),
    Angled(Formula),
    Top,
    Bot,
    And(Formula, Formula),
    Or(Formula, Formula),
    Imp(Formula, Formula),
    Box(Formula),
    Dia(Formula),
}

#[derive(Debug)]
struct Inner {
    size: u64,
    node: Node,
}

/// An immutable, cheaply clonable formula. Subterms are shared, so repeated
/// wrapping (conjunction ladders, translations) stays linear in memory.
#[derive(Clone)]
pub struct Formula(Arc<Inner>);

impl Formula {
    fn mk(node: Node) -> Formula {
        let size = match &node {
            Node::Atom(_) | Node::Top | Node::Bot => 1,
            Node::Angled(a) => a.size() + 2,
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => a.size() + b.size() + 1,
            Node::Box(a) | Node::Dia(a) => a.size() + 1,
        };
        Formula(Arc::new(Inner { size, node }))
    }

    pub fn atom(name: impl AsRef<str>) -> Formula {
        Formula::mk(Node::Atom(Arc::from(name.as_ref())))
    }

    /// Angled atom `<a>`; the payload must be a plain modal formula.
    pub fn angled(a: Formula) -> Result<Formula> {
        if a.contains_angled() {
            return Err(Error::AngledAtomPresent);
        }
        Ok(Formula::mk(Node::Angled(a)))
    }

    pub fn top() -> Formula {
        Formula::mk(Node::Top)
    }

    pub fn bot() -> Formula {
        Formula::mk(Node::Bot)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::mk(Node::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::mk(Node::Or(a, b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::mk(Node::Imp(a, b))
    }

    /// `~a` is notation for `a -> bot`.
    pub fn neg(a: Formula) -> Formula {
        Formula::imp(a, Formula::bot())
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::mk(Node::Box(a))
    }

    pub fn dia(a: Formula) -> Formula {
        Formula::mk(Node::Dia(a))
    }

    /// `O^n a` for `O` in {box, dia}.
    pub fn boxed_n(a: Formula, n: usize) -> Formula {
        (0..n).fold(a, |f, _| Formula::boxed(f))
    }

    pub fn dia_n(a: Formula, n: usize) -> Formula {
        (0..n).fold(a, |f, _| Formula::dia(f))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Identity of the shared node, for pointer-keyed memo tables.
    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    /// Number of symbols; `|<a>| = |a| + 2`.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.node(), Node::Atom(_) | Node::Angled(_))
    }

    pub fn contains_angled(&self) -> bool {
        match self.node() {
            Node::Angled(_) => true,
            Node::Atom(_) | Node::Top | Node::Bot => false,
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => {
                a.contains_angled() || b.contains_angled()
            }
            Node::Box(a) | Node::Dia(a) => a.contains_angled(),
        }
    }

    /// Least language tag the formula fits in.
    pub fn language(&self) -> LanguageTag {
        match self.node() {
            Node::Atom(_) | Node::Top | Node::Bot => LanguageTag::Propositional,
            Node::Angled(_) => LanguageTag::FullPlus,
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => a.language().join(b.language()),
            Node::Box(a) => a.language().join(LanguageTag::BoxOnly),
            Node::Dia(a) => a.language().join(LanguageTag::DiamondOnly),
        }
    }

    /// All atomic subformulas (named and angled), each once.
    pub fn atoms(&self) -> Vec<Formula> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_atoms(&mut out);
        out.into_iter().collect()
    }

    fn collect_atoms(&self, out: &mut std::collections::BTreeSet<Formula>) {
        match self.node() {
            Node::Atom(_) | Node::Angled(_) => {
                out.insert(self.clone());
            }
            Node::Top | Node::Bot => {}
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Node::Box(a) | Node::Dia(a) => a.collect_atoms(out),
        }
    }

    fn rank(&self) -> u8 {
        match self.node() {
            Node::Atom(_) => 0,
            Node::Angled(_) => 1,
            Node::Top => 2,
            Node::Bot => 3,
            Node::And(..) => 4,
            Node::Or(..) => 5,
            Node::Imp(..) => 6,
            Node::Box(..) => 7,
            Node::Dia(..) => 8,
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.size != other.0.size {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Atom(a), Node::Atom(b)) => a == b,
            (Node::Angled(a), Node::Angled(b)) => a == b,
            (Node::Top, Node::Top) | (Node::Bot, Node::Bot) => true,
            (Node::And(a, b), Node::And(c, d))
            | (Node::Or(a, b), Node::Or(c, d))
            | (Node::Imp(a, b), Node::Imp(c, d)) => a == c && b == d,
            (Node::Box(a), Node::Box(b)) | (Node::Dia(a), Node::Dia(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Formula {}

impl Ord for Formula {
    /// Total structural order: constructor rank, then children, then atom
    /// names. Used for the canonical multiset representation.
    fn cmp(&self, other: &Formula) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.rank().cmp(&other.rank()).then_with(|| match (self.node(), other.node()) {
            (Node::Atom(a), Node::Atom(b)) => a.cmp(b),
            (Node::Angled(a), Node::Angled(b)) => a.cmp(b),
            (Node::Top, Node::Top) | (Node::Bot, Node::Bot) => Ordering::Equal,
            (Node::And(a, b), Node::And(c, d))
            | (Node::Or(a, b), Node::Or(c, d))
            | (Node::Imp(a, b), Node::Imp(c, d)) => a.cmp(c).then_with(|| b.cmp(d)),
            (Node::Box(a), Node::Box(b)) | (Node::Dia(a), Node::Dia(b)) => a.cmp(b),
            _ => unreachable!("rank mismatch handled above"),
        })
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Formula) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Precedence levels for printing: -> is 1 (right associative), | is 2,
// & is 3, prefix operators are 4, atoms are 5.
fn fmt_prec(f: &Formula, min: u8, out: &mut String) {
    let prec = match f.node() {
        Node::Imp(_, b) if matches!(b.node(), Node::Bot) => 4,
        Node::Imp(..) => 1,
        Node::Or(..) => 2,
        Node::And(..) => 3,
        Node::Box(..) | Node::Dia(..) => 4,
        _ => 5,
    };
    let need_parens = prec < min;
    if need_parens {
        out.push('(');
    }
    match f.node() {
        Node::Atom(name) => out.push_str(name),
        Node::Angled(a) => {
            out.push('<');
            fmt_prec(a, 0, out);
            out.push('>');
        }
        Node::Top => out.push_str("top"),
        Node::Bot => out.push_str("bot"),
        Node::Imp(a, b) if matches!(b.node(), Node::Bot) => {
            out.push('~');
            fmt_prec(a, 4, out);
        }
        Node::And(a, b) => {
            fmt_prec(a, 3, out);
            out.push_str(" & ");
            fmt_prec(b, 4, out);
        }
        Node::Or(a, b) => {
            fmt_prec(a, 2, out);
            out.push_str(" | ");
            fmt_prec(b, 3, out);
        }
        Node::Imp(a, b) => {
            fmt_prec(a, 2, out);
            out.push_str(" -> ");
            fmt_prec(b, 1, out);
        }
        Node::Box(a) => {
            out.push_str("box ");
            fmt_prec(a, 4, out);
        }
        Node::Dia(a) => {
            out.push_str("dia ");
            fmt_prec(a, 4, out);
        }
    }
    if need_parens {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        fmt_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

/// Finite multiset of formulas in canonical (sorted) representation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct FMultiset {
    map: BTreeMap<Formula, usize>,
}

impl FMultiset {
    pub fn new() -> FMultiset {
        FMultiset::default()
    }

    pub fn singleton(f: Formula) -> FMultiset {
        let mut m = FMultiset::new();
        m.insert(f, 1);
        m
    }

    pub fn insert(&mut self, f: Formula, count: usize) {
        if count > 0 {
            *self.map.entry(f).or_insert(0) += count;
        }
    }

    /// Removes one occurrence; returns false if absent.
    pub fn remove_one(&mut self, f: &Formula) -> bool {
        match self.map.get_mut(f) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.map.remove(f);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, f: &Formula) -> usize {
        self.map.get(f).copied().unwrap_or(0)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.map.contains_key(f)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Cardinality `||G||`: number of members counting multiplicity.
    pub fn cardinality(&self) -> u64 {
        self.map.values().map(|&n| n as u64).sum()
    }

    /// Size `|G|`: total symbol count.
    pub fn size(&self) -> u64 {
        self.map.iter().map(|(f, &n)| f.size() * n as u64).sum()
    }

    /// Multiset sum (adds multiplicities).
    pub fn sum(&self, other: &FMultiset) -> FMultiset {
        let mut out = self.clone();
        for (f, &n) in &other.map {
            out.insert(f.clone(), n);
        }
        out
    }

    /// Multiset difference, saturating at zero.
    pub fn minus(&self, other: &FMultiset) -> FMultiset {
        let mut out = FMultiset::new();
        for (f, &n) in &self.map {
            let k = n.saturating_sub(other.count(f));
            if k > 0 {
                out.insert(f.clone(), k);
            }
        }
        out
    }

    pub fn without(&self, f: &Formula) -> FMultiset {
        let mut out = self.clone();
        out.remove_one(f);
        out
    }

    pub fn with(&self, f: Formula) -> FMultiset {
        let mut out = self.clone();
        out.insert(f, 1);
        out
    }

    pub fn subset_of(&self, other: &FMultiset) -> bool {
        self.map.iter().all(|(f, &n)| other.count(f) >= n)
    }

    /// Distinct members with multiplicities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Formula, usize)> {
        self.map.iter().map(|(f, &n)| (f, n))
    }

    /// All members with multiplicity, in canonical order.
    pub fn iter_flat(&self) -> impl Iterator<Item = &Formula> {
        self.map.iter().flat_map(|(f, &n)| std::iter::repeat(f).take(n))
    }

    pub fn to_vec(&self) -> Vec<Formula> {
        self.iter_flat().cloned().collect()
    }

    pub fn map(&self, mut g: impl FnMut(&Formula) -> Formula) -> FMultiset {
        let mut out = FMultiset::new();
        for (f, n) in self.iter() {
            out.insert(g(f), n);
        }
        out
    }

    /// `box G`.
    pub fn boxed(&self) -> FMultiset {
        self.map(|f| Formula::boxed(f.clone()))
    }

    /// Conjunction over the canonical order; `/\ {} = top`.
    pub fn big_and(&self) -> Formula {
        big_and_list(&self.to_vec())
    }

    /// Disjunction over the canonical order; `\/ {} = bot`.
    pub fn big_or(&self) -> Formula {
        big_or_list(&self.to_vec())
    }
}

impl FromIterator<Formula> for FMultiset {
    fn from_iter<T: IntoIterator<Item = Formula>>(iter: T) -> FMultiset {
        let mut m = FMultiset::new();
        for f in iter {
            m.insert(f, 1);
        }
        m
    }
}

impl fmt::Debug for FMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "{{")?;
        for g in self.iter_flat() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

/// Left-associated conjunction of a list; empty list is `top`.
pub fn big_and_list(fs: &[Formula]) -> Formula {
    match fs.split_first() {
        None => Formula::top(),
        Some((h, t)) => t.iter().fold(h.clone(), |acc, f| Formula::and(acc, f.clone())),
    }
}

/// Left-associated disjunction of a list; empty list is `bot`.
pub fn big_or_list(fs: &[Formula]) -> Formula {
    match fs.split_first() {
        None => Formula::bot(),
        Some((h, t)) => t.iter().fold(h.clone(), |acc, f| Formula::or(acc, f.clone())),
    }
}

/// A sequent `antecedent => succedent` over finite multisets.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sequent {
    pub antecedent: FMultiset,
    pub succedent: FMultiset,
}

impl Sequent {
    pub fn new(antecedent: FMultiset, succedent: FMultiset) -> Sequent {
        Sequent { antecedent, succedent }
    }

    /// `ant => f` with a single succedent formula.
    pub fn to(antecedent: FMultiset, f: Formula) -> Sequent {
        Sequent::new(antecedent, FMultiset::singleton(f))
    }

    /// `=> f` with empty antecedent.
    pub fn concl(f: Formula) -> Sequent {
        Sequent::to(FMultiset::new(), f)
    }

    pub fn size(&self) -> u64 {
        self.antecedent.size() + self.succedent.size()
    }

    pub fn is_single_conclusion(&self) -> bool {
        self.succedent.cardinality() <= 1
    }

    /// The unique succedent formula, if there is exactly one.
    pub fn succedent_formula(&self) -> Option<&Formula> {
        let mut it = self.succedent.iter_flat();
        match (it.next(), it.next()) {
            (Some(f), None) => Some(f),
            _ => None,
        }
    }

    /// Formula interpretation `I(S) = /\ ant -> \/ suc`.
    pub fn interpretation(&self) -> Formula {
        Formula::imp(self.antecedent.big_and(), self.succedent.big_or())
    }

    pub fn map(&self, mut g: impl FnMut(&Formula) -> Formula) -> Sequent {
        Sequent::new(self.antecedent.map(&mut g), self.succedent.map(&mut g))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ant: Vec<String> = self.antecedent.iter_flat().map(|x| x.to_string()).collect();
        let suc: Vec<String> = self.succedent.iter_flat().map(|x| x.to_string()).collect();
        if ant.is_empty() {
            write!(f, "=> {}", suc.join(", "))
        } else if suc.is_empty() {
            write!(f, "{} =>", ant.join(", "))
        } else {
            write!(f, "{} => {}", ant.join(", "), suc.join(", "))
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Substitution: atomic formulas (named or angled) to formulas, context
/// variables to multisets.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    atoms: BTreeMap<Formula, Formula>,
    contexts: BTreeMap<Arc<str>, FMultiset>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Maps an atomic formula. Panics if the key is not atomic.
    pub fn bind_atom(mut self, key: Formula, value: Formula) -> Substitution {
        assert!(key.is_atomic(), "substitution key must be atomic: {key}");
        self.atoms.insert(key, value);
        self
    }

    pub fn bind_named(self, name: &str, value: Formula) -> Substitution {
        self.bind_atom(Formula::atom(name), value)
    }

    pub fn bind_context(mut self, var: &str, value: FMultiset) -> Substitution {
        self.contexts.insert(Arc::from(var), value);
        self
    }

    pub fn atom_value(&self, key: &Formula) -> Option<&Formula> {
        self.atoms.get(key)
    }

    pub fn context_value(&self, var: &str) -> Option<&FMultiset> {
        self.contexts.get(var)
    }

    pub fn atom_bindings(&self) -> impl Iterator<Item = (&Formula, &Formula)> {
        self.atoms.iter()
    }

    pub fn context_bindings(&self) -> impl Iterator<Item = (&Arc<str>, &FMultiset)> {
        self.contexts.iter()
    }

    /// Adds identity bindings for the listed atoms when absent. Rule
    /// applications store fully bound substitutions so that mapping a
    /// formula transformation over a proof keeps instances aligned.
    pub fn completed_for(&self, atoms: &[Formula]) -> Substitution {
        let mut out = self.clone();
        for a in atoms {
            if out.atom_value(a).is_none() {
                out.atoms.insert(a.clone(), a.clone());
            }
        }
        out
    }

    /// Applies a formula map to every value (not keys).
    pub fn map_values(&self, mut g: impl FnMut(&Formula) -> Formula) -> Substitution {
        Substitution {
            atoms: self.atoms.iter().map(|(k, v)| (k.clone(), g(v))).collect(),
            contexts: self.contexts.iter().map(|(k, v)| (k.clone(), v.map(&mut g))).collect(),
        }
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        let mut first = true;
        for (k, v) in &self.atoms {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k} := {v}")?;
        }
        for (k, v) in &self.contexts {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k} := {v:?}")?;
        }
        write!(f, "]")
    }
}

/// Homomorphic substitution on atoms. Angled atoms are opaque: they are
/// replaced only when the map names them, never rewritten inside.
pub fn apply_subst(f: &Formula, s: &Substitution) -> Formula {
    match f.node() {
        Node::Atom(_) | Node::Angled(_) => s.atom_value(f).cloned().unwrap_or_else(|| f.clone()),
        Node::Top | Node::Bot => f.clone(),
        Node::And(a, b) => Formula::and(apply_subst(a, s), apply_subst(b, s)),
        Node::Or(a, b) => Formula::or(apply_subst(a, s), apply_subst(b, s)),
        Node::Imp(a, b) => Formula::imp(apply_subst(a, s), apply_subst(b, s)),
        Node::Box(a) => Formula::boxed(apply_subst(a, s)),
        Node::Dia(a) => Formula::dia(apply_subst(a, s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn size_is_additive() {
        let f = Formula::imp(Formula::boxed(p()), p());
        assert_eq!(f.size(), 4);
        let angled = Formula::angled(Formula::and(p(), q())).unwrap();
        assert_eq!(angled.size(), 3 + 2);
    }

    #[test]
    fn angled_payload_must_be_plain() {
        let inner = Formula::angled(p()).unwrap();
        assert!(Formula::angled(inner).is_err());
    }

    #[test]
    fn empty_conventions() {
        assert_eq!(FMultiset::new().big_and(), Formula::top());
        assert_eq!(FMultiset::new().big_or(), Formula::bot());
    }

    #[test]
    fn multiset_cardinality_and_size() {
        let mut m = FMultiset::new();
        m.insert(p(), 2);
        m.insert(Formula::and(p(), q()), 1);
        assert_eq!(m.cardinality(), 3);
        assert_eq!(m.size(), 2 + 3);
    }

    #[test]
    fn substitution_is_homomorphic_and_angled_opaque() {
        let s = Substitution::new().bind_named("p", Formula::and(q(), Formula::atom("r")));
        let f = Formula::or(p(), Formula::neg(p()));
        assert_eq!(
            apply_subst(&f, &s),
            parse_formula("(q & r) | ~(q & r)", LanguageTag::Full).unwrap()
        );
        let a = Formula::angled(Formula::and(p(), q())).unwrap();
        let s2 = Substitution::new().bind_named("p", Formula::atom("r"));
        assert_eq!(apply_subst(&a, &s2), a);
    }

    #[test]
    fn standard_map_on_angled_atoms() {
        // A(<x>, <y>) under <x> := x, <y> := y.
        let ax = Formula::angled(p()).unwrap();
        let ay = Formula::angled(q()).unwrap();
        let f = Formula::imp(ax.clone(), Formula::and(ay.clone(), ax.clone()));
        let s = Substitution::new().bind_atom(ax, p()).bind_atom(ay, q());
        assert_eq!(apply_subst(&f, &s), Formula::imp(p(), Formula::and(q(), p())));
    }

    #[test]
    fn substitution_composes_on_disjoint_domains() {
        let s1 = Substitution::new().bind_named("p", Formula::imp(q(), q()));
        let s2 = Substitution::new().bind_named("q", Formula::bot());
        let f = Formula::and(p(), q());
        let composed = s1.map_values(|v| apply_subst(v, &s2));
        let composed = {
            // s2 also acts on atoms untouched by s1
            let mut c = composed;
            for (k, v) in s2.atom_bindings() {
                if c.atom_value(k).is_none() {
                    c = c.bind_atom(k.clone(), v.clone());
                }
            }
            c
        };
        assert_eq!(apply_subst(&apply_subst(&f, &s1), &s2), apply_subst(&f, &composed));
    }
}
