//! Lexer and recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula := imp
//! imp     := unary ('->' imp)?                  right-associative
//! or      := and ('|' and)*                     sugar: a | b  =>  ~a -> b
//! and     := unary ('&' unary)*                 sugar: a & b  =>  ~(a -> ~b)
//! unary   := '~' unary | '[]' unary | '<>' unary
//!          | 'forall' var '.' unary | 'exists' var '.' unary
//!          | ident | ident '(' term {',' term} ')' | '(' formula ')'
//! ```
//!
//! `<>F` expands to `~[]~F` and `exists x . F` to `~forall x . ~F`. Binders
//! take a unary body, so `forall x . P(x) -> P(c)` is an implication whose
//! antecedent is the quantified formula; parenthesize to widen the scope.

use crate::formula::{Formula, Signature, Term};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> ParseError {
        ParseError { pos, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    BoxOp,
    Diamond,
    Imp,
    And,
    Or,
    Forall,
    Exists,
    LPar,
    RPar,
    Comma,
    Dot,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '~' => {
                out.push((Token::Not, i));
                i += 1;
            }
            '(' => {
                out.push((Token::LPar, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RPar, i));
                i += 1;
            }
            ',' => {
                out.push((Token::Comma, i));
                i += 1;
            }
            '.' => {
                out.push((Token::Dot, i));
                i += 1;
            }
            '&' => {
                out.push((Token::And, i));
                i += 1;
            }
            '|' => {
                out.push((Token::Or, i));
                i += 1;
            }
            '[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    out.push((Token::BoxOp, i));
                    i += 2;
                } else {
                    return Err(ParseError::new(i, "expected `]` after `[`"));
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Token::Diamond, i));
                    i += 2;
                } else {
                    return Err(ParseError::new(i, "expected `>` after `<`"));
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Token::Imp, i));
                    i += 2;
                } else {
                    return Err(ParseError::new(i, "expected `>` after `-`"));
                }
            }
            '_' => {
                return Err(ParseError::new(i, "names starting with `_` are reserved"));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "forall" => Token::Forall,
                    "exists" => Token::Exists,
                    _ => Token::Ident(word.to_string()),
                };
                out.push((tok, start));
            }
            other => {
                return Err(ParseError::new(i, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

/// How identifiers in term position and predicate names are resolved.
enum Mode<'a> {
    /// Every predicate and constant must be declared in the signature;
    /// undeclared term identifiers are variables.
    Declared(&'a Signature),
    /// The signature is inferred: applied identifiers become predicates,
    /// quantifier-bound identifiers are variables, all other term
    /// identifiers become constants. With `conventional_vars` set (the
    /// Hilbert derivation format, where open formulas are the norm),
    /// unbound `x`/`y`/`z`/`w` with an optional digit suffix are variables.
    Inferred { preds: BTreeMap<String, usize>, consts: Vec<String>, conventional_vars: bool },
}

fn is_conventional_var(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('x' | 'y' | 'z' | 'w')) && chars.all(|c| c.is_ascii_digit())
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    mode: Mode<'a>,
    bound: Vec<String>,
    binder_names: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::new(self.here(), format!("expected {what}")))
        }
    }

    fn parse_formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.parse_or()?;
        if self.peek() == Some(&Token::Imp) {
            self.pos += 1;
            let right = self.parse_formula()?;
            Ok(Formula::imp(left, right))
        } else {
            Ok(left)
        }
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            let right = self.parse_and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            let right = self.parse_unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Not) => Ok(Formula::not(self.parse_unary()?)),
            Some(Token::BoxOp) => Ok(Formula::boxed(self.parse_unary()?)),
            Some(Token::Diamond) => Ok(Formula::diamond(self.parse_unary()?)),
            Some(Token::Forall) => self.parse_binder(true),
            Some(Token::Exists) => self.parse_binder(false),
            Some(Token::LPar) => {
                let inner = self.parse_formula()?;
                self.expect(Token::RPar, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => self.parse_atom(name, pos),
            Some(other) => Err(ParseError::new(pos, format!("unexpected token {other:?}"))),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }

    fn parse_binder(&mut self, universal: bool) -> Result<Formula, ParseError> {
        let pos = self.here();
        let var = match self.bump() {
            Some(Token::Ident(v)) => v,
            _ => return Err(ParseError::new(pos, "expected variable after binder")),
        };
        if let Mode::Declared(sig) = &self.mode {
            if sig.is_constant(&var) || sig.predicate_arity(&var).is_some() {
                return Err(ParseError::new(pos, format!("bound variable {var:?} shadows a declared symbol")));
            }
        }
        self.expect(Token::Dot, "`.` after bound variable")?;
        self.bound.push(var.clone());
        self.binder_names.push(var.clone());
        let body = self.parse_unary()?;
        self.bound.pop();
        Ok(if universal { Formula::all(var, body) } else { Formula::exists(var, body) })
    }

    fn parse_atom(&mut self, name: String, pos: usize) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Token::LPar) {
            self.pos += 1;
            let mut args = Vec::new();
            loop {
                args.push(self.parse_term()?);
                match self.bump() {
                    Some(Token::Comma) => continue,
                    Some(Token::RPar) => break,
                    _ => return Err(ParseError::new(self.here(), "expected `,` or `)` in argument list")),
                }
            }
            match &mut self.mode {
                Mode::Declared(sig) => match sig.predicate_arity(&name) {
                    Some(arity) if arity == args.len() => {}
                    Some(arity) => {
                        return Err(ParseError::new(
                            pos,
                            format!("predicate {name:?} expects {arity} argument(s), got {}", args.len()),
                        ))
                    }
                    None => {
                        return Err(ParseError::new(pos, format!("undeclared predicate {name:?}")))
                    }
                },
                Mode::Inferred { preds, consts, .. } => {
                    if consts.iter().any(|c| c == &name) {
                        return Err(ParseError::new(pos, format!("{name:?} used both as constant and predicate")));
                    }
                    match preds.get(&name) {
                        Some(&arity) if arity != args.len() => {
                            return Err(ParseError::new(
                                pos,
                                format!("predicate {name:?} used with arities {arity} and {}", args.len()),
                            ))
                        }
                        _ => {
                            preds.insert(name.clone(), args.len());
                        }
                    }
                }
            }
            Ok(Formula::Pred(name, args))
        } else {
            // Bare identifier: a propositional atom.
            match &self.mode {
                Mode::Declared(sig) => {
                    if sig.predicate_arity(&name).is_some() {
                        return Err(ParseError::new(pos, format!("predicate {name:?} used without arguments")));
                    }
                    if sig.is_constant(&name) {
                        return Err(ParseError::new(pos, format!("constant {name:?} used as a formula")));
                    }
                }
                Mode::Inferred { preds, consts, .. } => {
                    if preds.contains_key(&name) || consts.iter().any(|c| c == &name) {
                        return Err(ParseError::new(pos, format!("{name:?} used both as atom and as a symbol")));
                    }
                }
            }
            Ok(Formula::Prop(name))
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        let pos = self.here();
        let name = match self.bump() {
            Some(Token::Ident(n)) => n,
            _ => return Err(ParseError::new(pos, "expected term")),
        };
        if self.bound.iter().any(|b| b == &name) {
            return Ok(Term::Var(name));
        }
        match &mut self.mode {
            Mode::Declared(sig) => {
                if sig.is_constant(&name) {
                    Ok(Term::Const(name))
                } else if sig.predicate_arity(&name).is_some() {
                    Err(ParseError::new(pos, format!("predicate {name:?} used as a term")))
                } else {
                    Ok(Term::Var(name))
                }
            }
            Mode::Inferred { preds, consts, conventional_vars } => {
                if preds.contains_key(&name) {
                    return Err(ParseError::new(pos, format!("{name:?} used both as predicate and term")));
                }
                if *conventional_vars && is_conventional_var(&name) {
                    return Ok(Term::Var(name));
                }
                if !consts.iter().any(|c| c == &name) {
                    consts.push(name.clone());
                }
                Ok(Term::Const(name))
            }
        }
    }
}

fn finish(parser: Parser<'_>, formula: Formula) -> Result<Formula, ParseError> {
    if parser.pos != parser.tokens.len() {
        return Err(ParseError::new(parser.here(), "trailing input after formula"));
    }
    if formula.contains_prop_atom() && formula.contains_first_order() {
        return Err(ParseError::new(
            0,
            "formula mixes propositional atoms with first-order constructs",
        ));
    }
    let consts = formula.constants();
    for b in &parser.binder_names {
        if consts.contains(b) {
            return Err(ParseError::new(0, format!("{b:?} used both as bound variable and constant")));
        }
    }
    Ok(formula)
}

/// Parses `text` against a declared signature. Sugar (`&`, `|`, `<>`,
/// `exists`) is expanded, so the result uses only the five primitive node
/// kinds.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        mode: Mode::Declared(sig),
        bound: Vec::new(),
        binder_names: Vec::new(),
    };
    let formula = parser.parse_formula()?;
    finish(parser, formula)
}

fn parse_inferred(text: &str, conventional_vars: bool) -> Result<(Formula, Signature), ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        mode: Mode::Inferred { preds: BTreeMap::new(), consts: Vec::new(), conventional_vars },
        bound: Vec::new(),
        binder_names: Vec::new(),
    };
    let formula = parser.parse_formula()?;
    let (preds, consts) = match &parser.mode {
        Mode::Inferred { preds, consts, .. } => (preds.clone(), consts.clone()),
        Mode::Declared(_) => unreachable!(),
    };
    let formula = finish(parser, formula)?;
    let mut sig = Signature::new();
    for (name, arity) in preds {
        sig.add_predicate(&name, arity).map_err(|e| ParseError::new(0, e.to_string()))?;
    }
    for name in consts {
        sig.add_constant(&name).map_err(|e| ParseError::new(0, e.to_string()))?;
    }
    Ok((formula, sig))
}

/// Parses `text` and infers its signature: applied identifiers become
/// predicates, quantifier-bound identifiers are variables and every other
/// term identifier becomes a constant.
pub fn parse_with_inference(text: &str) -> Result<(Formula, Signature), ParseError> {
    parse_inferred(text, false)
}

/// Inference-mode parsing for Hilbert derivations, where open formulas are
/// routine: unbound identifiers `x`, `y`, `z`, `w` (optionally followed by
/// digits) are read as free variables rather than constants.
pub fn parse_hilbert_formula(text: &str) -> Result<Formula, ParseError> {
    parse_inferred(text, true).map(|(f, _)| f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula as F;

    fn sig() -> Signature {
        let mut s = Signature::new();
        s.add_predicate("P", 1).unwrap();
        s.add_predicate("R", 2).unwrap();
        s.add_constant("c").unwrap();
        s.add_constant("d").unwrap();
        s
    }

    fn var(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn cst(n: &str) -> Term {
        Term::Const(n.into())
    }

    #[test]
    fn parses_box_implication() {
        let f = parse("[]p -> p", &Signature::new()).unwrap();
        assert_eq!(f, F::imp(F::boxed(F::prop("p")), F::prop("p")));
    }

    #[test]
    fn diamond_is_sugar() {
        let f = parse("<>P(c)", &sig()).unwrap();
        assert_eq!(f, F::not(F::boxed(F::not(F::pred("P", vec![cst("c")])))));
    }

    #[test]
    fn exists_is_sugar() {
        let f = parse("exists x . P(x)", &sig()).unwrap();
        assert_eq!(f, F::not(F::all("x", F::not(F::pred("P", vec![var("x")])))));
    }

    #[test]
    fn and_or_are_sugar() {
        let f = parse("p & q", &Signature::new()).unwrap();
        assert_eq!(f, F::not(F::imp(F::prop("p"), F::not(F::prop("q")))));
        let g = parse("p | q", &Signature::new()).unwrap();
        assert_eq!(g, F::imp(F::not(F::prop("p")), F::prop("q")));
    }

    #[test]
    fn implication_right_associative() {
        let f = parse("p -> q -> r", &Signature::new()).unwrap();
        assert_eq!(f, F::imp(F::prop("p"), F::imp(F::prop("q"), F::prop("r"))));
    }

    #[test]
    fn binder_body_is_unary() {
        // Barcan shape: the quantifier does not swallow the implication.
        let f = parse("forall x . []P(x) -> [] forall x . P(x)", &sig()).unwrap();
        assert_eq!(
            f,
            F::imp(
                F::all("x", F::boxed(F::pred("P", vec![var("x")]))),
                F::boxed(F::all("x", F::pred("P", vec![var("x")]))),
            )
        );
        // Nested binders chain without parentheses.
        let g = parse("forall x . exists y . R(x,y)", &sig()).unwrap();
        assert_eq!(g, F::all("x", F::exists("y", F::pred("R", vec![var("x"), var("y")]))));
    }

    #[test]
    fn rejects_bad_input() {
        let s = sig();
        assert!(parse("", &s).is_err());
        assert!(parse("p ->", &s).is_err());
        assert!(parse("P(c,d)", &s).is_err()); // arity mismatch
        assert!(parse("Q(c)", &s).is_err()); // undeclared predicate
        assert!(parse("P", &s).is_err()); // predicate without arguments
        assert!(parse("c", &s).is_err()); // constant as formula
        assert!(parse("P(_k1)", &s).is_err()); // reserved name
        assert!(parse("p -> P(c)", &s).is_err()); // mixed modes
        assert!(parse("p q", &s).is_err()); // trailing input
        let err = parse("p -> (q", &s).unwrap_err();
        assert!(err.pos > 0);
    }

    #[test]
    fn inference_mode() {
        let (f, isig) = parse_with_inference("forall x . P(x) -> P(c)").unwrap();
        assert_eq!(
            f,
            F::imp(F::all("x", F::pred("P", vec![var("x")])), F::pred("P", vec![cst("c")]))
        );
        assert_eq!(isig.predicate_arity("P"), Some(1));
        assert_eq!(isig.constants(), ["c".to_string()]);
        assert!(parse_with_inference("P(c) -> P(c,c)").is_err()); // arity conflict
        assert!(parse_with_inference("P(P)").is_err());
    }

    #[test]
    fn print_parse_round_trip_examples() {
        let s = sig();
        for text in [
            "[]p -> p",
            "~[]~[]p -> []p",
            "forall x . P(x) -> P(c)",
            "forall x . forall y . R(x,y)",
            "(p -> q) -> ~q -> ~p",
            "[](p -> ~~q)",
            "forall x . (P(x) -> forall y . R(x,y))",
        ] {
            let f = parse(text, &s).unwrap();
            let printed = f.to_string();
            let reparsed = parse(&printed, &s).unwrap();
            assert_eq!(f, reparsed, "round-trip through {printed:?}");
        }
    }
}
