//! The textual description language: a parser with positioned errors and a
//! canonical printer.
//!
//! ```text
//! # comment
//! const nancy, ada.
//! axiom ~cephalopod(X) | mollusc(X).
//! axiom (~s1 & ~s2) | (~s3 & ~s4).
//! def r1: mollusc(X) => shell(X).
//! wrn w1: nautilus(X) ~> ~shell(X).
//! prefer r2 > r1.
//! prefer r2[X=nancy] > "ax0:mollusc(nancy)".
//! ```
//!
//! Identifiers starting with an uppercase letter are variables; constants
//! and predicates start lowercase. Formulas use `~`, `&`, `|` and
//! parentheses, with `|` binding loosest. Strict rules cannot be written:
//! they only arise by compiling axioms, so `->` is rejected with a hint.

use std::fmt::Write as _;

use thiserror::Error;

use crate::description::{
    build_description, DescriptionError, PlausibleDescription, PriorityStatement, Rule, RuleKind,
    RuleRef, UserRule,
};
use crate::syntax::{Atom, Formula, Literal, Substitution, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A parsed description file, before grounding and checking.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DescriptionFile {
    pub constants: Vec<String>,
    pub axioms: Vec<Formula>,
    pub rules: Vec<ParsedRule>,
    pub priorities: Vec<PriorityStatement>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRule {
    pub name: String,
    pub kind: RuleKind,
    pub antecedents: Vec<Formula>,
    pub consequent: Formula,
}

impl DescriptionFile {
    /// Grounds and checks the file into a plausible description.
    pub fn build(&self) -> Result<PlausibleDescription, DescriptionError> {
        let user_rules = self
            .rules
            .iter()
            .map(|r| UserRule {
                name: r.name.clone(),
                rule: Rule::new(r.kind, r.antecedents.iter().cloned(), r.consequent.clone()),
            })
            .collect();
        build_description(
            self.constants.iter().cloned(),
            &self.axioms,
            user_rules,
            &self.priorities,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Comma,
    Dot,
    Colon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Gt,
    Pipe,
    Amp,
    Tilde,
    DefArrow,
    WrnArrow,
    StrictArrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::DefArrow => "`=>`".into(),
            Tok::WrnArrow => "`~>`".into(),
            Tok::StrictArrow => "`->`".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    loop {
        let here = Pos { line, col };
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => return Ok(out),
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), here));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek().copied() {
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError {
                                line: here.line,
                                col: here.col,
                                message: "unterminated string".into(),
                            })
                        }
                        Some(c) => {
                            s.push(c);
                            bump!();
                        }
                    }
                }
                out.push((Tok::Str(s), here));
            }
            ',' => {
                bump!();
                out.push((Tok::Comma, here));
            }
            '.' => {
                bump!();
                out.push((Tok::Dot, here));
            }
            ':' => {
                bump!();
                out.push((Tok::Colon, here));
            }
            '(' => {
                bump!();
                out.push((Tok::LParen, here));
            }
            ')' => {
                bump!();
                out.push((Tok::RParen, here));
            }
            '[' => {
                bump!();
                out.push((Tok::LBracket, here));
            }
            ']' => {
                bump!();
                out.push((Tok::RBracket, here));
            }
            '>' => {
                bump!();
                out.push((Tok::Gt, here));
            }
            '|' => {
                bump!();
                out.push((Tok::Pipe, here));
            }
            '&' => {
                bump!();
                out.push((Tok::Amp, here));
            }
            '~' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    out.push((Tok::WrnArrow, here));
                } else {
                    out.push((Tok::Tilde, here));
                }
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    out.push((Tok::DefArrow, here));
                } else {
                    out.push((Tok::Eq, here));
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    out.push((Tok::StrictArrow, here));
                } else {
                    return Err(ParseError {
                        line: here.line,
                        col: here.col,
                        message: "unexpected `-`".into(),
                    });
                }
            }
            other => {
                return Err(ParseError {
                    line: here.line,
                    col: here.col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        let end = toks
            .last()
            .map(|&(_, p)| Pos {
                line: p.line,
                col: p.col + 1,
            })
            .unwrap_or(Pos { line: 1, col: 1 });
        Ok(Parser { toks, at: 0, end })
    }

    fn here(&self) -> Pos {
        self.toks.get(self.at).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let p = self.here();
        Err(ParseError {
            line: p.line,
            col: p.col,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|f| f.describe())
                .unwrap_or_else(|| "end of input".into());
            self.fail(format!("expected {}, found {}", t.describe(), found))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next() {
                Some(Tok::Ident(s)) => Ok(s),
                _ => unreachable!(),
            },
            other => {
                let found = other
                    .map(|f| f.describe())
                    .unwrap_or_else(|| "end of input".into());
                self.fail(format!("expected {what}, found {found}"))
            }
        }
    }

    fn lowercase_ident(&mut self, what: &str) -> Result<String, ParseError> {
        let save = self.at;
        let s = self.ident(what)?;
        if s.starts_with(|c: char| c.is_ascii_uppercase()) {
            self.at = save;
            return self.fail(format!("{what} must start with a lowercase letter: `{s}`"));
        }
        Ok(s)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and_expr()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.and_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::or(parts)
        })
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::and(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Tilde) {
            return Ok(self.unary()?.negate());
        }
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(&Tok::RParen)?;
            return Ok(f);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pred = self.lowercase_ident("predicate")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let name = self.ident("term")?;
                args.push(if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Term::Var(name)
                } else {
                    Term::Const(name)
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
        }
        Ok(Formula::Lit(Literal::pos(Atom::new(pred, args))))
    }

    fn rule_ref(&mut self) -> Result<RuleRef, ParseError> {
        if let Some(Tok::Str(_)) = self.peek() {
            match self.next() {
                Some(Tok::Str(name)) => return Ok(RuleRef::Generated { name }),
                _ => unreachable!(),
            }
        }
        let name = self.ident("rule name")?;
        let bindings = if self.eat(&Tok::LBracket) {
            let mut s = Substitution::new();
            loop {
                let save = self.at;
                let var = self.ident("variable")?;
                if !var.starts_with(|c: char| c.is_ascii_uppercase()) {
                    self.at = save;
                    return self.fail(format!("binding keys are variables: `{var}`"));
                }
                self.expect(&Tok::Eq)?;
                let val = self.lowercase_ident("constant")?;
                s.insert(var, val);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBracket)?;
            Some(s)
        } else {
            None
        };
        Ok(RuleRef::User { name, bindings })
    }

    fn rule_body(&mut self, kind: RuleKind) -> Result<(Vec<Formula>, Formula), ParseError> {
        let arrow = match kind {
            RuleKind::Defeasible => Tok::DefArrow,
            RuleKind::Warning => Tok::WrnArrow,
            RuleKind::Strict => unreachable!("strict rules are never parsed"),
        };
        let mut antecedents = Vec::new();
        if !self.eat(&arrow) {
            loop {
                antecedents.push(self.formula()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                if self.peek() == Some(&Tok::StrictArrow) {
                    return self.fail(
                        "strict rules cannot be written directly; state an axiom and let it compile",
                    );
                }
                self.expect(&arrow)?;
                break;
            }
        }
        let consequent = self.formula()?;
        self.expect(&Tok::Dot)?;
        Ok((antecedents, consequent))
    }

    fn description(&mut self) -> Result<DescriptionFile, ParseError> {
        let mut file = DescriptionFile::default();
        while self.peek().is_some() {
            let keyword = self.ident("statement keyword")?;
            match keyword.as_str() {
                "const" => loop {
                    file.constants.push(self.lowercase_ident("constant")?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(&Tok::Dot)?;
                    break;
                },
                "axiom" => {
                    file.axioms.push(self.formula()?);
                    if self.peek() == Some(&Tok::StrictArrow) {
                        return self.fail(
                            "strict rules cannot be written directly; axioms compile to them",
                        );
                    }
                    self.expect(&Tok::Dot)?;
                }
                "def" | "wrn" => {
                    let kind = if keyword == "def" {
                        RuleKind::Defeasible
                    } else {
                        RuleKind::Warning
                    };
                    let name = self.ident("rule name")?;
                    self.expect(&Tok::Colon)?;
                    let (antecedents, consequent) = self.rule_body(kind)?;
                    file.rules.push(ParsedRule {
                        name,
                        kind,
                        antecedents,
                        consequent,
                    });
                }
                "prefer" => {
                    let superior = self.rule_ref()?;
                    self.expect(&Tok::Gt)?;
                    let inferior = self.rule_ref()?;
                    self.expect(&Tok::Dot)?;
                    file.priorities.push(PriorityStatement { superior, inferior });
                }
                other => {
                    self.at -= 1;
                    return self.fail(format!(
                        "expected `const`, `axiom`, `def`, `wrn` or `prefer`, found `{other}`"
                    ));
                }
            }
        }
        Ok(file)
    }
}

/// Parses a description file.
pub fn parse_description(text: &str) -> Result<DescriptionFile, ParseError> {
    Parser::new(text)?.description()
}

/// Parses a single formula, requiring the whole input to be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.fail("trailing input after formula");
    }
    Ok(f)
}

/// Canonical rendering of a description file: constants sorted into one
/// statement, axioms sorted by their canonical text, rules sorted by name,
/// priorities sorted. Parsing the output and printing again is the
/// identity.
pub fn print_description(file: &DescriptionFile) -> String {
    let mut out = String::new();
    let mut constants: Vec<&String> = file.constants.iter().collect();
    constants.sort();
    constants.dedup();
    if !constants.is_empty() {
        let names: Vec<&str> = constants.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "const {}.", names.join(", "));
    }
    let mut axioms: Vec<String> = file.axioms.iter().map(|f| f.to_string()).collect();
    axioms.sort();
    axioms.dedup();
    for a in axioms {
        let _ = writeln!(out, "axiom {a}.");
    }
    let mut rules: Vec<&ParsedRule> = file.rules.iter().collect();
    rules.sort_by(|a, b| a.name.cmp(&b.name));
    for r in rules {
        let keyword = match r.kind {
            RuleKind::Defeasible => "def",
            RuleKind::Warning => "wrn",
            RuleKind::Strict => unreachable!("strict rules are never parsed"),
        };
        let mut ants: Vec<String> = r.antecedents.iter().map(|f| f.to_string()).collect();
        ants.sort();
        ants.dedup();
        let lhs = if ants.is_empty() {
            String::new()
        } else {
            format!("{} ", ants.join(", "))
        };
        let _ = writeln!(
            out,
            "{keyword} {}: {}{} {}.",
            r.name,
            lhs,
            r.kind.arrow(),
            r.consequent
        );
    }
    let mut prefs: Vec<String> = file
        .priorities
        .iter()
        .map(|p| format!("prefer {} > {}.", p.superior, p.inferior))
        .collect();
    prefs.sort();
    prefs.dedup();
    for p in prefs {
        let _ = writeln!(out, "{p}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_statement_kind() {
        let text = "\
# a comment
const nancy.
axiom ~cephalopod(X) | mollusc(X).
def r1: mollusc(X) => shell(X).
wrn w1: nautilus(X) ~> ~shell(X).
def d: => winner.
prefer r1 > w1.
prefer r1[X=nancy] > \"ax0:mollusc(nancy)\".
";
        let file = parse_description(text).unwrap();
        assert_eq!(file.constants, vec!["nancy"]);
        assert_eq!(file.axioms.len(), 1);
        assert_eq!(file.rules.len(), 3);
        assert_eq!(file.priorities.len(), 2);
        assert!(file.rules[2].antecedents.is_empty());
    }

    #[test]
    fn formula_precedence_and_sets() {
        let f = parse_formula("a & b | c").unwrap();
        assert_eq!(f.to_string(), "(a & b) | c");
        let g = parse_formula("~(a | b) & c").unwrap();
        assert_eq!(g.to_string(), "c & ~(a | b)");
        assert_eq!(parse_formula("b | a").unwrap(), parse_formula("a | b").unwrap());
        assert_eq!(parse_formula("~~p").unwrap(), parse_formula("p").unwrap());
    }

    #[test]
    fn nested_disjunctions_stay_nested() {
        let flat = parse_formula("a | b | c").unwrap();
        let nested = parse_formula("a | (b | c)").unwrap();
        assert_ne!(flat, nested);
        assert_eq!(nested, parse_formula(&nested.to_string()).unwrap());
    }

    #[test]
    fn rejects_strict_arrows_with_a_hint() {
        let err = parse_description("def r: a -> b.").unwrap_err();
        assert!(err.message.contains("strict"), "{err}");
    }

    #[test]
    fn reports_positions() {
        let err = parse_description("axiom p &.\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col > 1);
        let err = parse_description("axiom p.\nbogus q.\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 1);
    }

    #[test]
    fn print_then_parse_is_stable() {
        let text = "\
const b, a.
axiom q | p.
def r2: p & q => w.
def r1: => p.
prefer r2 > r1.
";
        let once = print_description(&parse_description(text).unwrap());
        let twice = print_description(&parse_description(&once).unwrap());
        assert_eq!(once, twice);
    }
}
