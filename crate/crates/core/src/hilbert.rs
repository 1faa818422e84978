//! Schema-based axiom matching and step-by-step verification of Hilbert
//! derivations in Tm, S4m, S5m and their starred extensions, including the
//! generalization side condition of the deduction metatheorem.

use crate::formula::{canonicalize, is_free_for, occurs_free, substitute, Formula, Term};
use crate::truth::Logic;
use std::collections::HashMap;
use std::fmt;

/// The axiom schemas of the Hilbert calculi.
///
/// `FourBox` is the schema `[]F -> [][]F` attached to S4m and S5m, and
/// `FiveDia` is `~[]~[]F -> []F` attached to S5m only; the axiom names `4`
/// and `5` are accepted for either schema, with membership decided by which
/// schema actually matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    Ax1,
    Ax2,
    Ax3,
    Ax4,
    Ax5,
    Ax6,
    K,
    K1,
    K2,
    M1,
    M2,
    M3,
    M4,
    T,
    FourBox,
    FiveDia,
    Dn1,
    Dn2,
    Bf,
    Cbf,
    Nbf,
    Pbf,
}

impl Schema {
    pub fn name(self) -> &'static str {
        use Schema::*;
        match self {
            Ax1 => "ax1",
            Ax2 => "ax2",
            Ax3 => "ax3",
            Ax4 => "ax4",
            Ax5 => "ax5",
            Ax6 => "ax6",
            K => "k",
            K1 => "k1",
            K2 => "k2",
            M1 => "m1",
            M2 => "m2",
            M3 => "m3",
            M4 => "m4",
            T => "t",
            FourBox => "4",
            FiveDia => "5",
            Dn1 => "dn1",
            Dn2 => "dn2",
            Bf => "bf",
            Cbf => "cbf",
            Nbf => "nbf",
            Pbf => "pbf",
        }
    }

    /// Candidate schemas for a user-written axiom name. The names `4`, `a4`,
    /// `5` and `a5` resolve to both box-iteration schemas.
    pub fn candidates(name: &str) -> Vec<Schema> {
        use Schema::*;
        match name.to_ascii_lowercase().as_str() {
            "ax1" => vec![Ax1],
            "ax2" => vec![Ax2],
            "ax3" => vec![Ax3],
            "ax4" => vec![Ax4],
            "ax5" => vec![Ax5],
            "ax6" => vec![Ax6],
            "k" => vec![K],
            "k1" => vec![K1],
            "k2" => vec![K2],
            "m1" => vec![M1],
            "m2" => vec![M2],
            "m3" => vec![M3],
            "m4" => vec![M4],
            "t" => vec![T],
            "4" | "a4" | "5" | "a5" => vec![FourBox, FiveDia],
            "dn1" => vec![Dn1],
            "dn2" => vec![Dn2],
            "bf" => vec![Bf],
            "cbf" => vec![Cbf],
            "nbf" => vec![Nbf],
            "pbf" => vec![Pbf],
            _ => vec![],
        }
    }

    /// Whether the schema belongs to the axiom set of the logic (with the
    /// starred extension when `first_order` is set).
    pub fn in_logic(self, logic: Logic, first_order: bool) -> bool {
        use Schema::*;
        match self {
            Ax1 | Ax2 | Ax3 | K | K1 | K2 | M1 | M2 | M3 | M4 | T | Dn1 | Dn2 => true,
            FourBox => matches!(logic, Logic::S4m | Logic::S5m),
            FiveDia => logic == Logic::S5m,
            Ax4 | Ax5 | Ax6 | Bf | Cbf | Nbf | Pbf => first_order,
        }
    }
}

/// A successful schema match: the metavariable instantiation, plus the term
/// chosen for Ax4's substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub schema: Schema,
    pub bindings: Vec<(&'static str, Formula)>,
    pub term: Option<Term>,
}

/// Patterns for the purely propositional-shaped schemas, over metavariables
/// 'p' (phi), 'q' (psi), 'r' (xi).
#[derive(Debug, Clone)]
enum Pat {
    Meta(char),
    Not(Box<Pat>),
    Box_(Box<Pat>),
    Imp(Box<Pat>, Box<Pat>),
}

fn meta(c: char) -> Pat {
    Pat::Meta(c)
}

fn pnot(p: Pat) -> Pat {
    Pat::Not(Box::new(p))
}

fn pbox(p: Pat) -> Pat {
    Pat::Box_(Box::new(p))
}

fn pimp(a: Pat, b: Pat) -> Pat {
    Pat::Imp(Box::new(a), Box::new(b))
}

fn schema_pattern(schema: Schema) -> Option<Pat> {
    use Schema::*;
    let p = || meta('p');
    let q = || meta('q');
    let r = || meta('r');
    Some(match schema {
        Ax1 => pimp(p(), pimp(q(), p())),
        Ax2 => pimp(pimp(p(), pimp(q(), r())), pimp(pimp(p(), q()), pimp(p(), r()))),
        Ax3 => pimp(pimp(pnot(q()), pnot(p())), pimp(pimp(pnot(q()), p()), q())),
        K => pimp(pbox(pimp(p(), q())), pimp(pbox(p()), pbox(q()))),
        K1 => pimp(pbox(pimp(p(), q())), pimp(pbox(pnot(q())), pbox(pnot(p())))),
        K2 => pimp(pnot(pbox(pnot(pimp(p(), q())))), pimp(pbox(p()), pnot(pbox(pnot(q()))))),
        M1 => pimp(pbox(pnot(p())), pbox(pimp(p(), q()))),
        M2 => pimp(pbox(q()), pbox(pimp(p(), q()))),
        M3 => pimp(pnot(pbox(pnot(q()))), pnot(pbox(pnot(pimp(p(), q()))))),
        M4 => pimp(pnot(pbox(pnot(pnot(p())))), pnot(pbox(pnot(pimp(p(), q()))))),
        T => pimp(pbox(p()), p()),
        FourBox => pimp(pbox(p()), pbox(pbox(p()))),
        FiveDia => pimp(pnot(pbox(pnot(pbox(p())))), pbox(p())),
        Dn1 => pimp(pbox(p()), pbox(pnot(pnot(p())))),
        Dn2 => pimp(pbox(pnot(pnot(p()))), pbox(p())),
        Ax4 | Ax5 | Ax6 | Bf | Cbf | Nbf | Pbf => return None,
    })
}

fn match_pattern(pat: &Pat, f: &Formula, bind: &mut HashMap<char, Formula>) -> bool {
    match (pat, f) {
        (Pat::Meta(m), _) => match bind.get(m) {
            Some(b) => b == f,
            None => {
                bind.insert(*m, f.clone());
                true
            }
        },
        (Pat::Not(p), Formula::Not(a)) => match_pattern(p, a, bind),
        (Pat::Box_(p), Formula::Box(a)) => match_pattern(p, a, bind),
        (Pat::Imp(p1, p2), Formula::Imp(a, b)) => {
            match_pattern(p1, a, bind) && match_pattern(p2, b, bind)
        }
        _ => false,
    }
}

fn bindings_vec(bind: HashMap<char, Formula>) -> Vec<(&'static str, Formula)> {
    let mut out: Vec<(&'static str, Formula)> = bind
        .into_iter()
        .map(|(m, f)| {
            let name = match m {
                'p' => "phi",
                'q' => "psi",
                _ => "xi",
            };
            (name, f)
        })
        .collect();
    out.sort_by_key(|(n, _)| *n);
    out
}

/// Terms occurring in a formula (variables and constants), used as
/// substitution candidates for Ax4.
fn terms_of(f: &Formula, acc: &mut Vec<Term>) {
    match f {
        Formula::Prop(_) => {}
        Formula::Pred(_, args) => {
            for t in args {
                if !acc.contains(t) {
                    acc.push(t.clone());
                }
            }
        }
        Formula::Not(a) | Formula::Box(a) | Formula::All(_, a) => terms_of(a, acc),
        Formula::Imp(a, b) => {
            terms_of(a, acc);
            terms_of(b, acc);
        }
    }
}

/// Tries to match `f` as an instance of `schema`, including side conditions.
pub fn match_axiom(schema: Schema, f: &Formula) -> Option<MatchResult> {
    use Schema::*;
    if let Some(pat) = schema_pattern(schema) {
        let mut bind = HashMap::new();
        if match_pattern(&pat, f, &mut bind) {
            return Some(MatchResult { schema, bindings: bindings_vec(bind), term: None });
        }
        return None;
    }
    match schema {
        // forall x phi -> phi[x/tau], tau free for x in phi
        Ax4 => {
            let Formula::Imp(lhs, rhs) = f else { return None };
            let Formula::All(x, body) = lhs.as_ref() else { return None };
            // candidate terms: those occurring in the conclusion, plus x
            // itself (covering the no-free-occurrence instance)
            let mut candidates = Vec::new();
            terms_of(rhs, &mut candidates);
            candidates.push(Term::Var(x.clone()));
            for tau in candidates {
                if is_free_for(&tau, x, body) {
                    if let Ok(inst) = substitute(body, x, &tau) {
                        if &inst == rhs.as_ref() {
                            return Some(MatchResult {
                                schema,
                                bindings: vec![("phi", body.as_ref().clone())],
                                term: Some(tau),
                            });
                        }
                    }
                }
            }
            None
        }
        // forall x (phi -> psi) -> (phi -> forall x psi), x not free in phi
        Ax5 => {
            let Formula::Imp(lhs, rhs) = f else { return None };
            let Formula::All(x, inner) = lhs.as_ref() else { return None };
            let Formula::Imp(phi, psi) = inner.as_ref() else { return None };
            let Formula::Imp(phi2, all_psi) = rhs.as_ref() else { return None };
            let Formula::All(x2, psi2) = all_psi.as_ref() else { return None };
            if x == x2 && phi == phi2 && psi == psi2 && !occurs_free(x, phi) {
                return Some(MatchResult {
                    schema,
                    bindings: vec![("phi", phi.as_ref().clone()), ("psi", psi.as_ref().clone())],
                    term: None,
                });
            }
            None
        }
        // phi -> psi where phi and psi are variants
        Ax6 => {
            let Formula::Imp(a, b) = f else { return None };
            if canonicalize(a) == canonicalize(b) {
                return Some(MatchResult {
                    schema,
                    bindings: vec![("phi", a.as_ref().clone()), ("psi", b.as_ref().clone())],
                    term: None,
                });
            }
            None
        }
        Bf | Cbf | Nbf | Pbf => {
            let Formula::Imp(lhs, rhs) = f else { return None };
            let check = |x: &str, a: &Formula, x2: &str, b: &Formula| x == x2 && a == b;
            let matched = match schema {
                // forall x []phi -> [] forall x phi
                Bf => match (lhs.as_ref(), rhs.as_ref()) {
                    (Formula::All(x, ba), Formula::Box(ab)) => match (ba.as_ref(), ab.as_ref()) {
                        (Formula::Box(a), Formula::All(x2, b)) => {
                            check(x, a, x2, b).then(|| a.as_ref().clone())
                        }
                        _ => None,
                    },
                    _ => None,
                },
                // [] forall x phi -> forall x []phi
                Cbf => match (lhs.as_ref(), rhs.as_ref()) {
                    (Formula::Box(ab), Formula::All(x2, bb)) => match (ab.as_ref(), bb.as_ref()) {
                        (Formula::All(x, a), Formula::Box(b)) => {
                            check(x, a, x2, b).then(|| a.as_ref().clone())
                        }
                        _ => None,
                    },
                    _ => None,
                },
                // forall x ~[]~phi -> ~[]~ forall x phi
                Nbf => match (strip_all_dia(lhs), strip_dia_all(rhs)) {
                    (Some((x, a)), Some((x2, b))) => check(x, a, x2, b).then(|| a.clone()),
                    _ => None,
                },
                // ~[]~ forall x phi -> forall x ~[]~phi
                Pbf => match (strip_dia_all(lhs), strip_all_dia(rhs)) {
                    (Some((x2, b)), Some((x, a))) => check(x, a, x2, b).then(|| a.clone()),
                    _ => None,
                },
                _ => unreachable!(),
            };
            matched.map(|phi| MatchResult { schema, bindings: vec![("phi", phi)], term: None })
        }
        _ => unreachable!("pattern-based schemas handled above"),
    }
}

/// `forall x ~[]~phi` decomposed.
fn strip_all_dia(f: &Formula) -> Option<(&str, &Formula)> {
    let Formula::All(x, body) = f else { return None };
    let Formula::Not(b1) = body.as_ref() else { return None };
    let Formula::Box(b2) = b1.as_ref() else { return None };
    let Formula::Not(phi) = b2.as_ref() else { return None };
    Some((x, phi))
}

/// `~[]~ forall x phi` decomposed.
fn strip_dia_all(f: &Formula) -> Option<(&str, &Formula)> {
    let Formula::Not(b1) = f else { return None };
    let Formula::Box(b2) = b1.as_ref() else { return None };
    let Formula::Not(all) = b2.as_ref() else { return None };
    let Formula::All(x, phi) = all.as_ref() else { return None };
    Some((x, phi))
}

/// Finds the first schema from the logic's axiom set matching `f` among the
/// candidates named by `name`.
pub fn match_named_axiom(
    name: &str,
    logic: Logic,
    first_order: bool,
    f: &Formula,
) -> Result<MatchResult, AxiomFailure> {
    let candidates = Schema::candidates(name);
    if candidates.is_empty() {
        return Err(AxiomFailure::UnknownName(name.to_string()));
    }
    let mut matched_outside = None;
    for schema in candidates {
        if let Some(m) = match_axiom(schema, f) {
            if schema.in_logic(logic, first_order) {
                return Ok(m);
            }
            matched_outside = Some(schema);
        }
    }
    match matched_outside {
        Some(schema) => Err(AxiomFailure::NotInLogic(schema)),
        None => Err(AxiomFailure::NoMatch(name.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomFailure {
    UnknownName(String),
    NoMatch(String),
    /// The formula matches the schema, but the schema is outside the
    /// selected logic's axiom set.
    NotInLogic(Schema),
}

impl fmt::Display for AxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomFailure::UnknownName(n) => write!(f, "unknown axiom name {n:?}"),
            AxiomFailure::NoMatch(n) => write!(f, "formula is not an instance of axiom {n}"),
            AxiomFailure::NotInLogic(s) => {
                write!(f, "schema {} is not in the selected logic's axiom set", s.name())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Reference to the premise list (0-based), or by-formula lookup when
    /// written without an index.
    Premise(Option<usize>),
    Axiom(String),
    /// Modus ponens: step `from` holds phi, step `imp` holds phi -> psi.
    Mp { from: usize, imp: usize },
    /// Generalization over the variable on the referenced step.
    Gen { from: usize, var: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based step index.
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} rejected: {}", self.step, self.reason)
    }
}

impl std::error::Error for Rejection {}

/// Verifies a derivation step by step. With `dmt_guard` set, every
/// generalization whose variable occurs free in some premise is rejected
/// (the deduction-metatheorem side condition).
pub fn check_derivation(
    logic: Logic,
    first_order: bool,
    premises: &[Formula],
    derivation: &Derivation,
    dmt_guard: bool,
) -> Result<(), Rejection> {
    let reject = |step: usize, reason: String| Rejection { step: step + 1, reason };
    for (i, step) in derivation.steps.iter().enumerate() {
        match &step.justification {
            Justification::Premise(idx) => match idx {
                Some(k) => {
                    if premises.get(*k) != Some(&step.formula) {
                        return Err(reject(i, format!("premise {} does not match", k + 1)));
                    }
                }
                None => {
                    if !premises.contains(&step.formula) {
                        return Err(reject(i, "formula is not among the premises".to_string()));
                    }
                }
            },
            Justification::Axiom(name) => {
                if let Err(e) = match_named_axiom(name, logic, first_order, &step.formula) {
                    return Err(reject(i, e.to_string()));
                }
            }
            Justification::Mp { from, imp } => {
                if *from >= i || *imp >= i {
                    return Err(reject(i, "modus ponens references a later step".to_string()));
                }
                let phi = &derivation.steps[*from].formula;
                match &derivation.steps[*imp].formula {
                    Formula::Imp(a, b) if a.as_ref() == phi && b.as_ref() == &step.formula => {}
                    _ => {
                        return Err(reject(
                            i,
                            format!("modus ponens shape mismatch between steps {} and {}", from + 1, imp + 1),
                        ))
                    }
                }
            }
            Justification::Gen { from, var } => {
                if !first_order {
                    return Err(reject(i, "generalization requires a starred system".to_string()));
                }
                if *from >= i {
                    return Err(reject(i, "generalization references a later step".to_string()));
                }
                let body = &derivation.steps[*from].formula;
                let expected = Formula::All(var.clone(), Box::new(body.clone()));
                if expected != step.formula {
                    return Err(reject(i, "generalization shape mismatch".to_string()));
                }
                if dmt_guard {
                    for (k, premise) in premises.iter().enumerate() {
                        if occurs_free(var, premise) {
                            return Err(reject(
                                i,
                                format!(
                                    "generalized variable {var} occurs free in premise {}",
                                    k + 1
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Line-oriented derivation format
//
//   n. <formula> ; premise [k] | axiom <name> | mp i,j | gen i x

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for DerivationParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "derivation line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for DerivationParseError {}

/// Parses the line-oriented derivation format with an inferred signature.
pub fn parse_derivation(text: &str) -> Result<Derivation, DerivationParseError> {
    let mut steps = Vec::new();
    let mut expected = 1usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| DerivationParseError { line: lineno + 1, message: m };
        let (num, rest) = line
            .split_once('.')
            .ok_or_else(|| err("expected `n. <formula> ; <justification>`".to_string()))?;
        let n: usize =
            num.trim().parse().map_err(|_| err(format!("bad step number {:?}", num.trim())))?;
        if n != expected {
            return Err(err(format!("expected step number {expected}, found {n}")));
        }
        expected += 1;
        let (formula_text, just_text) =
            rest.split_once(';').ok_or_else(|| err("missing `;` before justification".to_string()))?;
        let formula = crate::parser::parse_hilbert_formula(formula_text.trim())
            .map_err(|e| err(e.to_string()))?;
        let words: Vec<&str> = just_text.trim().split_whitespace().collect();
        let justification = match words.as_slice() {
            ["premise"] => Justification::Premise(None),
            ["premise", k] => {
                let k: usize =
                    k.parse().map_err(|_| err(format!("bad premise index {k:?}")))?;
                if k == 0 {
                    return Err(err("premise indices are 1-based".to_string()));
                }
                Justification::Premise(Some(k - 1))
            }
            ["axiom", name] => Justification::Axiom((*name).to_string()),
            ["mp", rest @ ..] if !rest.is_empty() => {
                let joined = rest.concat();
                let (i, j) = joined
                    .split_once(',')
                    .ok_or_else(|| err("mp expects `mp i,j`".to_string()))?;
                let i: usize = i.trim().parse().map_err(|_| err("bad mp index".to_string()))?;
                let j: usize = j.trim().parse().map_err(|_| err("bad mp index".to_string()))?;
                if i == 0 || j == 0 {
                    return Err(err("mp indices are 1-based".to_string()));
                }
                Justification::Mp { from: i - 1, imp: j - 1 }
            }
            ["gen", i, var] => {
                let i: usize = i.parse().map_err(|_| err("bad gen index".to_string()))?;
                if i == 0 {
                    return Err(err("gen indices are 1-based".to_string()));
                }
                Justification::Gen { from: i - 1, var: (*var).to_string() }
            }
            _ => return Err(err(format!("unrecognized justification {:?}", just_text.trim()))),
        };
        steps.push(Step { formula, justification });
    }
    Ok(Derivation { steps })
}
