//! Syntax of propositional and first-order modal formulas: terms, formulas,
//! predicate signatures, substitution, variant normalization and the
//! complexity measure that drives tableau termination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A term is a variable or an individual constant. Function symbols are not
/// part of the language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Formula tree over the five primitive node kinds. `exists`, `<>`, `&` and
/// `|` are parser-level sugar expanded into these primitives.
///
/// A well-formed tree is either purely propositional (`Prop`, `Not`, `Box`,
/// `Imp`) or first-order (`Pred`, `All` and the connectives, no `Prop`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// Propositional atom.
    Prop(String),
    /// First-order atom: predicate applied to one or more terms.
    Pred(String, Vec<Term>),
    Not(Box<Formula>),
    /// Necessity operator.
    Box(Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    All(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn all(x: impl Into<String>, f: Formula) -> Formula {
        Formula::All(x.into(), Box::new(f))
    }

    /// `exists x . f`, expanded to `~forall x . ~f`.
    pub fn exists(x: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::all(x, Formula::not(f)))
    }

    /// `<>f`, expanded to `~[]~f`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::not(Formula::boxed(Formula::not(f)))
    }

    /// `a & b`, expanded to `~(a -> ~b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::imp(a, Formula::not(b)))
    }

    /// `a | b`, expanded to `~a -> b`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::imp(Formula::not(a), b)
    }

    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Pred(name.into(), args)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Prop(_) | Formula::Pred(..))
    }

    /// True iff the tree contains no first-order nodes (`Pred`, `All`).
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Pred(..) | Formula::All(..) => false,
            Formula::Not(a) | Formula::Box(a) => a.is_propositional(),
            Formula::Imp(a, b) => a.is_propositional() && b.is_propositional(),
        }
    }

    pub fn contains_prop_atom(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Pred(..) => false,
            Formula::Not(a) | Formula::Box(a) | Formula::All(_, a) => a.contains_prop_atom(),
            Formula::Imp(a, b) => a.contains_prop_atom() || b.contains_prop_atom(),
        }
    }

    pub fn contains_first_order(&self) -> bool {
        match self {
            Formula::Prop(_) => false,
            Formula::Pred(..) | Formula::All(..) => true,
            Formula::Not(a) | Formula::Box(a) => a.contains_first_order(),
            Formula::Imp(a, b) => a.contains_first_order() || b.contains_first_order(),
        }
    }

    pub fn is_sentence(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Constants occurring anywhere in the formula, sorted.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        self.collect_constants(&mut acc);
        acc
    }

    fn collect_constants(&self, acc: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(_) => {}
            Formula::Pred(_, args) => {
                for t in args {
                    if let Term::Const(c) = t {
                        acc.insert(c.clone());
                    }
                }
            }
            Formula::Not(a) | Formula::Box(a) | Formula::All(_, a) => a.collect_constants(acc),
            Formula::Imp(a, b) => {
                a.collect_constants(acc);
                b.collect_constants(acc);
            }
        }
    }

    /// Predicates occurring in the formula with their observed arities.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut acc = BTreeMap::new();
        self.collect_predicates(&mut acc);
        acc
    }

    fn collect_predicates(&self, acc: &mut BTreeMap<String, usize>) {
        match self {
            Formula::Prop(_) => {}
            Formula::Pred(p, args) => {
                acc.insert(p.clone(), args.len());
            }
            Formula::Not(a) | Formula::Box(a) | Formula::All(_, a) => a.collect_predicates(acc),
            Formula::Imp(a, b) => {
                a.collect_predicates(acc);
                b.collect_predicates(acc);
            }
        }
    }
}

/// The complexity measure: atoms are 0, negation, box and quantifier add 1,
/// and c(a -> b) = c(a) + c(b) + 1.
pub fn complexity(f: &Formula) -> usize {
    match f {
        Formula::Prop(_) | Formula::Pred(..) => 0,
        Formula::Not(a) | Formula::Box(a) | Formula::All(_, a) => complexity(a) + 1,
        Formula::Imp(a, b) => complexity(a) + complexity(b) + 1,
    }
}

/// The set of variables with a free occurrence in `f`, sorted.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    fn walk(f: &Formula, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match f {
            Formula::Prop(_) => {}
            Formula::Pred(_, args) => {
                for t in args {
                    if let Term::Var(v) = t {
                        if !bound.iter().any(|b| b == v) {
                            acc.insert(v.clone());
                        }
                    }
                }
            }
            Formula::Not(a) | Formula::Box(a) => walk(a, bound, acc),
            Formula::Imp(a, b) => {
                walk(a, bound, acc);
                walk(b, bound, acc);
            }
            Formula::All(x, a) => {
                bound.push(x.clone());
                walk(a, bound, acc);
                bound.pop();
            }
        }
    }
    let mut acc = BTreeSet::new();
    walk(f, &mut Vec::new(), &mut acc);
    acc
}

/// True iff `x` has a free occurrence in `f`.
pub fn occurs_free(x: &str, f: &Formula) -> bool {
    match f {
        Formula::Prop(_) => false,
        Formula::Pred(_, args) => args.iter().any(|t| matches!(t, Term::Var(v) if v == x)),
        Formula::Not(a) | Formula::Box(a) => occurs_free(x, a),
        Formula::Imp(a, b) => occurs_free(x, a) || occurs_free(x, b),
        Formula::All(y, a) => y != x && occurs_free(x, a),
    }
}

/// True iff `term` is free for `x` in `f`: no free occurrence of `x` lies in
/// the scope of a quantifier binding the variable of `term`. Constants are
/// always free for any variable.
pub fn is_free_for(term: &Term, x: &str, f: &Formula) -> bool {
    let z = match term {
        Term::Const(_) => return true,
        Term::Var(z) => z,
    };
    fn walk(z: &str, x: &str, f: &Formula) -> bool {
        match f {
            Formula::Prop(_) | Formula::Pred(..) => true,
            Formula::Not(a) | Formula::Box(a) => walk(z, x, a),
            Formula::Imp(a, b) => walk(z, x, a) && walk(z, x, b),
            Formula::All(y, a) => {
                if y == x {
                    true
                } else if y == z && occurs_free(x, a) {
                    false
                } else {
                    walk(z, x, a)
                }
            }
        }
    }
    walk(z, x, f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubstError {
    /// The replacement variable would be captured by a quantifier.
    WouldCapture { var: String, term: String },
}

impl fmt::Display for SubstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstError::WouldCapture { var, term } => {
                write!(f, "term {term} is not free for {var}: substitution would capture it")
            }
        }
    }
}

impl std::error::Error for SubstError {}

/// `f[x/term]`: replaces every free occurrence of `x` by `term`. Fails when
/// `term` is a variable that is not free for `x` in `f`.
pub fn substitute(f: &Formula, x: &str, term: &Term) -> Result<Formula, SubstError> {
    if !is_free_for(term, x, f) {
        return Err(SubstError::WouldCapture { var: x.to_string(), term: term.name().to_string() });
    }
    Ok(substitute_unchecked(f, x, term))
}

fn substitute_unchecked(f: &Formula, x: &str, term: &Term) -> Formula {
    match f {
        Formula::Prop(p) => Formula::Prop(p.clone()),
        Formula::Pred(p, args) => Formula::Pred(
            p.clone(),
            args.iter()
                .map(|t| match t {
                    Term::Var(v) if v == x => term.clone(),
                    other => other.clone(),
                })
                .collect(),
        ),
        Formula::Not(a) => Formula::not(substitute_unchecked(a, x, term)),
        Formula::Box(a) => Formula::boxed(substitute_unchecked(a, x, term)),
        Formula::Imp(a, b) => {
            Formula::imp(substitute_unchecked(a, x, term), substitute_unchecked(b, x, term))
        }
        Formula::All(y, a) => {
            if y == x {
                f.clone()
            } else {
                Formula::All(y.clone(), Box::new(substitute_unchecked(a, x, term)))
            }
        }
    }
}

/// Universal closure: binds the free variables of `f` in sorted order, the
/// first variable outermost. Identity on sentences.
pub fn universal_closure(f: &Formula) -> Formula {
    let vars = free_vars(f);
    let mut out = f.clone();
    for v in vars.into_iter().rev() {
        out = Formula::All(v, Box::new(out));
    }
    out
}

/// A formula in variant-normal form: void quantifiers removed and bound
/// variables renamed by binder position. Two formulas are variants of each
/// other exactly when their canonical forms are equal, so canonical forms
/// serve as branch and valuation keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Canonical(Formula);

impl Canonical {
    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Normalizes a formula up to the variant relation.
///
/// Propositional formulas are returned unchanged (the variant relation needs
/// quantifiers to act). On first-order formulas: void universal quantifiers
/// are deleted, double negations collapse (a void existential quantifier can
/// be inserted between the negations and then deleted together with them, so
/// `~~F` and `F` are variants), and the surviving binders are renamed to
/// `x1, x2, ...` in visit order, skipping names that occur free anywhere in
/// the input.
pub fn canonicalize(f: &Formula) -> Canonical {
    if f.is_propositional() {
        return Canonical(f.clone());
    }
    let avoid = free_vars(f);
    let mut counter = 0usize;
    let mut env: Vec<(String, String)> = Vec::new();
    Canonical(canon_rec(f, &mut env, &mut counter, &avoid))
}

/// Convenience test for the variant relation.
pub fn variant(a: &Formula, b: &Formula) -> bool {
    canonicalize(a) == canonicalize(b)
}

fn canonical_binder_name(counter: &mut usize, avoid: &BTreeSet<String>) -> String {
    loop {
        *counter += 1;
        let name = format!("x{counter}");
        if !avoid.contains(&name) {
            return name;
        }
    }
}

fn canon_rec(
    f: &Formula,
    env: &mut Vec<(String, String)>,
    counter: &mut usize,
    avoid: &BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Prop(p) => Formula::Prop(p.clone()),
        Formula::Pred(p, args) => Formula::Pred(
            p.clone(),
            args.iter()
                .map(|t| match t {
                    Term::Var(v) => match env.iter().rev().find(|(old, _)| old == v) {
                        Some((_, new)) => Term::Var(new.clone()),
                        None => Term::Var(v.clone()),
                    },
                    Term::Const(c) => Term::Const(c.clone()),
                })
                .collect(),
        ),
        Formula::Not(a) => {
            let inner = canon_rec(a, env, counter, avoid);
            match inner {
                Formula::Not(d) => *d,
                other => Formula::not(other),
            }
        }
        Formula::Box(a) => Formula::boxed(canon_rec(a, env, counter, avoid)),
        Formula::Imp(a, b) => {
            let left = canon_rec(a, env, counter, avoid);
            let right = canon_rec(b, env, counter, avoid);
            Formula::imp(left, right)
        }
        Formula::All(x, a) => {
            if !occurs_free(x, a) {
                return canon_rec(a, env, counter, avoid);
            }
            let name = canonical_binder_name(counter, avoid);
            env.push((x.clone(), name.clone()));
            let body = canon_rec(a, env, counter, avoid);
            env.pop();
            Formula::All(name, Box::new(body))
        }
    }
}

/// Printing uses the ASCII input grammar: `~` `[]` `->` `forall x . ...`,
/// with implication right-associative and unary operators binding tightest.
/// Sugar is never reconstructed, so `parse(print(f)) == f`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_imp(self, f)
    }
}

fn print_imp(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Imp(a, b) => {
            print_unary(a, f)?;
            write!(f, " -> ")?;
            print_imp(b, f)
        }
        other => print_unary(other, f),
    }
}

fn print_unary(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Prop(p) => f.write_str(p),
        Formula::Pred(p, args) => {
            f.write_str(p)?;
            write!(f, "(")?;
            for (i, t) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")
        }
        Formula::Not(a) => {
            f.write_str("~")?;
            print_unary(a, f)
        }
        Formula::Box(a) => {
            f.write_str("[]")?;
            print_unary(a, f)
        }
        Formula::All(x, a) => {
            write!(f, "forall {x} . ")?;
            print_unary(a, f)
        }
        Formula::Imp(..) => {
            write!(f, "(")?;
            print_imp(formula, f)?;
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureError {
    InvalidName(String),
    ReservedName(String),
    DuplicateName(String),
    ZeroArity(String),
}

impl fmt::Display for SignatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureError::InvalidName(n) => write!(f, "invalid symbol name {n:?}"),
            SignatureError::ReservedName(n) => {
                write!(f, "name {n:?} is reserved (leading underscores belong to the fresh pool)")
            }
            SignatureError::DuplicateName(n) => write!(f, "name {n:?} declared twice"),
            SignatureError::ZeroArity(n) => write!(f, "predicate {n:?} must have arity >= 1"),
        }
    }
}

impl std::error::Error for SignatureError {}

/// A basic predicate signature: predicate symbols with arities >= 1 and an
/// ordered list of individual constants. An unbounded reserved pool of fresh
/// constants `_k1, _k2, ...` is always available and disjoint from user
/// names, which may not start with an underscore.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    preds: BTreeMap<String, usize>,
    consts: Vec<String>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    fn check_name(&self, name: &str) -> Result<(), SignatureError> {
        let mut chars = name.chars();
        let valid = match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
            Some('_') => return Err(SignatureError::ReservedName(name.to_string())),
            _ => false,
        };
        if !valid {
            return Err(SignatureError::InvalidName(name.to_string()));
        }
        if self.preds.contains_key(name) || self.consts.iter().any(|c| c == name) {
            return Err(SignatureError::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        self.check_name(name)?;
        if arity == 0 {
            return Err(SignatureError::ZeroArity(name.to_string()));
        }
        self.preds.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), SignatureError> {
        self.check_name(name)?;
        self.consts.push(name.to_string());
        Ok(())
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.iter().map(|(n, a)| (n.as_str(), *a))
    }

    /// Declared constants in declaration order.
    pub fn constants(&self) -> &[String] {
        &self.consts
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.consts.iter().any(|c| c == name) || is_fresh_constant(name)
    }
}

/// The `i`-th fresh constant, `i >= 1`. Fresh names are never parseable from
/// user input, so they cannot collide with declared symbols.
pub fn fresh_constant(i: usize) -> String {
    format!("_k{i}")
}

pub fn is_fresh_constant(name: &str) -> bool {
    name.strip_prefix("_k").is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}
