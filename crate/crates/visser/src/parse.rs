//! Text syntax for formulas, sequents, and meta-sequents.
//!
//! Formula grammar: atoms `[a-z][a-zA-Z0-9_]*`; constants `top`, `bot`;
//! prefix `box`, `dia`, `~`; infix `&`, `|`, `->` with precedence
//! prefix > `&` > `|` > `->` and right-associative `->`; angled atoms
//! `< formula >`; parentheses. Sequents: `A, B => C`. Meta-sequents:
//! `G ; box H ; A, B => D` with uppercase context variables.

use std::sync::Arc;

use crate::calculus::{ContextSlot, MetaSequent, MetaSuccedent};
use crate::error::{Error, Result};
use crate::formula::{FMultiset, Formula, LanguageTag, Sequent};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LIdent(String),
    UIdent(String),
    KwBox,
    KwDia,
    KwTop,
    KwBot,
    Amp,
    Pipe,
    Arrow,
    SeqArrow,
    Tilde,
    Lt,
    Gt,
    LParen,
    RParen,
    Comma,
    Semi,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '&' => {
                out.push((Tok::Amp, i));
                i += 1;
            }
            '|' => {
                out.push((Tok::Pipe, i));
                i += 1;
            }
            '~' => {
                out.push((Tok::Tilde, i));
                i += 1;
            }
            '<' => {
                out.push((Tok::Lt, i));
                i += 1;
            }
            '>' => {
                out.push((Tok::Gt, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            ';' => {
                out.push((Tok::Semi, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(Error::Syntax { position: i, message: "expected `->`".into() });
                }
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Tok::SeqArrow, i));
                    i += 2;
                } else {
                    return Err(Error::Syntax { position: i, message: "expected `=>`".into() });
                }
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "box" => Tok::KwBox,
                    "dia" => Tok::KwDia,
                    "top" => Tok::KwTop,
                    "bot" => Tok::KwBot,
                    _ if c.is_ascii_lowercase() => Tok::LIdent(word.to_string()),
                    _ => Tok::UIdent(word.to_string()),
                };
                out.push((tok, start));
            }
            _ => {
                return Err(Error::Syntax {
                    position: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    lang: LanguageTag,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.here(),
                message: format!("expected {t:?}, found {:?}", self.peek()),
            })
        }
    }

    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax { position: self.here(), message: message.to_string() })
    }

    // implication level, right-associative
    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula> {
        let mut f = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_level()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::neg(self.unary()?))
            }
            Some(Tok::KwBox) => {
                if !self.lang.allows_box() {
                    return Err(Error::LanguageViolation {
                        connective: "box".into(),
                        lang: self.lang.to_string(),
                    });
                }
                self.pos += 1;
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Tok::KwDia) => {
                if !self.lang.allows_dia() {
                    return Err(Error::LanguageViolation {
                        connective: "dia".into(),
                        lang: self.lang.to_string(),
                    });
                }
                self.pos += 1;
                Ok(Formula::dia(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.bump() {
            Some(Tok::LIdent(name)) => Ok(Formula::atom(name)),
            Some(Tok::KwTop) => Ok(Formula::top()),
            Some(Tok::KwBot) => Ok(Formula::bot()),
            Some(Tok::LParen) => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Lt) => {
                if !self.lang.allows_angled() {
                    return Err(Error::LanguageViolation {
                        connective: "<...>".into(),
                        lang: self.lang.to_string(),
                    });
                }
                // Payloads are plain modal formulas; no nested angles.
                let saved = self.lang;
                self.lang = LanguageTag::Full;
                let inner = self.formula()?;
                self.lang = saved;
                self.expect(Tok::Gt)?;
                Formula::angled(inner)
            }
            other => {
                self.pos = self.pos.saturating_sub(usize::from(other.is_some()));
                self.err("expected a formula")
            }
        }
    }

    fn formula_list(&mut self) -> Result<Vec<Formula>> {
        let mut out = vec![self.formula()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.formula()?);
        }
        Ok(out)
    }
}

fn parser<'a>(toks: &'a [(Tok, usize)], text: &str, lang: LanguageTag) -> Parser<'a> {
    Parser { toks, pos: 0, end: text.len(), lang }
}

/// Parses a single formula; connectives outside `lang` are rejected.
pub fn parse_formula(text: &str, lang: LanguageTag) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = parser(&toks, text, lang);
    let f = p.formula()?;
    if p.pos != toks.len() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}

/// Parses `A, B => C` (succedent may be empty or comma-separated).
pub fn parse_sequent(text: &str, lang: LanguageTag) -> Result<Sequent> {
    let toks = lex(text)?;
    let mut p = parser(&toks, text, lang);
    let ant: FMultiset = if p.peek() == Some(&Tok::SeqArrow) {
        FMultiset::new()
    } else {
        p.formula_list()?.into_iter().collect()
    };
    p.expect(Tok::SeqArrow)?;
    let suc: FMultiset = if p.pos == toks.len() {
        FMultiset::new()
    } else {
        p.formula_list()?.into_iter().collect()
    };
    if p.pos != toks.len() {
        return p.err("trailing input after sequent");
    }
    Ok(Sequent::new(ant, suc))
}

/// Parses a meta-sequent like `G ; box H ; A, B => D`. Parts of the
/// antecedent are separated by `;`; a part is a context variable
/// (uppercase), `box` + context variable, or a comma-separated formula
/// list. The succedent is empty, a context variable, or a formula list.
pub fn parse_meta_sequent(text: &str, lang: LanguageTag) -> Result<MetaSequent> {
    let toks = lex(text)?;
    let mut p = parser(&toks, text, lang);
    let mut contexts: Vec<ContextSlot> = Vec::new();
    let mut ant = FMultiset::new();
    loop {
        match p.peek() {
            Some(Tok::SeqArrow) => break,
            Some(Tok::UIdent(v)) => {
                let v = v.clone();
                p.pos += 1;
                contexts.push(ContextSlot::plain(&v));
            }
            Some(Tok::KwBox) if matches!(p.toks.get(p.pos + 1).map(|(t, _)| t), Some(Tok::UIdent(_))) => {
                p.pos += 1;
                if let Some(Tok::UIdent(v)) = p.bump() {
                    if !lang.allows_box() {
                        return Err(Error::LanguageViolation {
                            connective: "box".into(),
                            lang: lang.to_string(),
                        });
                    }
                    contexts.push(ContextSlot::boxed(&v));
                }
            }
            Some(_) => {
                for f in p.formula_list()? {
                    ant.insert(f, 1);
                }
            }
            None => return p.err("expected `=>`"),
        }
        match p.peek() {
            Some(Tok::Semi) => {
                p.pos += 1;
            }
            Some(Tok::SeqArrow) => break,
            _ => return p.err("expected `;` or `=>`"),
        }
    }
    p.expect(Tok::SeqArrow)?;
    let succedent = match p.peek() {
        None => MetaSuccedent::Formulas(FMultiset::new()),
        Some(Tok::UIdent(v)) => {
            let v: Arc<str> = Arc::from(v.as_str());
            p.pos += 1;
            MetaSuccedent::Var(v)
        }
        Some(_) => MetaSuccedent::Formulas(p.formula_list()?.into_iter().collect()),
    };
    if p.pos != toks.len() {
        return p.err("trailing input after meta-sequent");
    }
    Ok(MetaSequent::new(contexts, ant, succedent))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_examples() {
        let f = parse_formula("box p -> p", LanguageTag::Full).unwrap();
        assert_eq!(f, Formula::imp(Formula::boxed(Formula::atom("p")), Formula::atom("p")));
        assert!(matches!(
            parse_formula("dia (p | q)", LanguageTag::BoxOnly),
            Err(Error::LanguageViolation { .. })
        ));
        let a = parse_formula("<p & q>", LanguageTag::FullPlus).unwrap();
        assert_eq!(
            a,
            Formula::angled(Formula::and(Formula::atom("p"), Formula::atom("q"))).unwrap()
        );
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "box p -> p",
            "bot",
            "<p>",
            "~(p & q) -> ~p | ~q",
            "dia (p -> q) & box r",
            "p -> q -> r",
            "(p -> q) -> r",
            "box (p | q)",
            "<box p -> q> & <top>",
            "~~p",
            "dia box p -> box dia p",
        ] {
            let f = parse_formula(text, LanguageTag::FullPlus).unwrap();
            let printed = f.to_string();
            let again = parse_formula(&printed, LanguageTag::FullPlus).unwrap();
            assert_eq!(f, again, "round trip failed for {text} -> {printed}");
            // printing is idempotent on canonical text
            assert_eq!(printed, again.to_string());
        }
    }

    #[test]
    fn print_examples() {
        assert_eq!(
            Formula::imp(Formula::boxed(Formula::atom("p")), Formula::atom("p")).to_string(),
            "box p -> p"
        );
        assert_eq!(Formula::bot().to_string(), "bot");
        assert_eq!(Formula::angled(Formula::atom("p")).unwrap().to_string(), "<p>");
    }

    #[test]
    fn nested_angles_rejected() {
        assert!(parse_formula("<<p>>", LanguageTag::FullPlus).is_err());
    }

    #[test]
    fn sequent_forms() {
        let s = parse_sequent("p, q => r", LanguageTag::Full).unwrap();
        assert_eq!(s.antecedent.cardinality(), 2);
        assert_eq!(s.succedent_formula(), Some(&Formula::atom("r")));
        let s = parse_sequent("p =>", LanguageTag::Full).unwrap();
        assert!(s.succedent.is_empty());
        let s = parse_sequent("=> p", LanguageTag::Full).unwrap();
        assert!(s.antecedent.is_empty());
        let s = parse_sequent("p, p => q", LanguageTag::Full).unwrap();
        assert_eq!(s.antecedent.count(&Formula::atom("p")), 2);
    }

    #[test]
    fn meta_sequent_forms() {
        let m = parse_meta_sequent("G ; box H ; p, q => D", LanguageTag::Full).unwrap();
        assert_eq!(m.contexts.len(), 2);
        assert!(m.contexts.iter().any(|c| c.boxed));
        assert_eq!(m.antecedent.cardinality(), 2);
        assert!(matches!(m.succedent, MetaSuccedent::Var(_)));
        let m = parse_meta_sequent("box G ; dia p => dia q", LanguageTag::Full).unwrap();
        assert_eq!(m.contexts.len(), 1);
        let m = parse_meta_sequent("=> p | ~p", LanguageTag::Full).unwrap();
        assert!(m.contexts.is_empty());
        // display round trip
        for text in ["G ; box H ; p, q => D", "box G ; dia p => dia q", "G =>"] {
            let m = parse_meta_sequent(text, LanguageTag::Full).unwrap();
            let again = parse_meta_sequent(&m.to_string(), LanguageTag::Full).unwrap();
            assert_eq!(m, again);
        }
    }

    #[test]
    fn syntax_error_positions() {
        match parse_formula("p & ", LanguageTag::Full) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_formula("p $ q", LanguageTag::Full).is_err());
        assert!(parse_formula("p q", LanguageTag::Full).is_err());
    }
}
