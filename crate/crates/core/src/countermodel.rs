//! From open branches to semantic objects: Hintikka-condition checking,
//! extraction of assignments from open saturated propositional branches, and
//! extraction of structures plus valuations from open first-order branches,
//! cross-checked against the semantic modules.

use crate::formula::{canonicalize, substitute, Canonical, Formula, Term};
use crate::model::{instantiation_closure, FoValuation, Structure};
use crate::propdag::{NodeId, PropDag, PropOp};
use crate::tableau::{prop_rule, Branch, ConnectiveKind, SignedFormula};
use crate::truth::{box_op, forall_op, imp_op, neg_op, Logic, TruthValue, ValueSet};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

// ---------------------------------------------------------------------------
// Hintikka sets

/// A violated Hintikka clause with the signed formulas witnessing it.
///
/// Clause numbering: 1 sign uniqueness across variants; 2 negation;
/// 3 box with sign T or t; 4 box with sign f or F; 5-8 implication with
/// sign T, t, f, F; 9-12 universal quantifier with sign T, t, f, F.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintikkaViolation {
    pub clause: u8,
    pub witnesses: Vec<SignedFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintikkaReport {
    pub violations: Vec<HintikkaViolation>,
}

impl HintikkaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for HintikkaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("hintikka: pass");
        }
        writeln!(f, "hintikka: fail")?;
        for v in &self.violations {
            write!(f, "  clause {}:", v.clause)?;
            for w in &v.witnesses {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn rule_satisfied(
    logic: Logic,
    sign: TruthValue,
    kind: ConnectiveKind,
    children: [Option<&Canonical>; 2],
    signs: &BTreeMap<Canonical, TruthValue>,
) -> bool {
    let rule = prop_rule(logic, sign, kind);
    rule.branches.iter().any(|alt| {
        alt.iter().all(|&(s, which)| {
            let child = children[which as usize].expect("rule refers to an existing child");
            signs.get(child) == Some(&s)
        })
    })
}

/// Checks the Hintikka conditions of a signed-formula set over the given
/// constant list. The propositional clauses are derived from the logic's
/// rule tables (so e.g. `t:[]p` has no legal child value in S4m and violates
/// clause 3); the quantifier clauses 9-11 range over `constants`.
pub fn check_hintikka(logic: Logic, set: &[SignedFormula], constants: &[String]) -> HintikkaReport {
    let mut violations = Vec::new();
    let mut signs: BTreeMap<Canonical, TruthValue> = BTreeMap::new();
    // clause 1: a sentence (up to variants) carries one sign
    for sf in set {
        match signs.get(&sf.sentence) {
            Some(&sign) if sign != sf.sign => violations.push(HintikkaViolation {
                clause: 1,
                witnesses: vec![SignedFormula { sign, sentence: sf.sentence.clone() }, sf.clone()],
            }),
            _ => {
                signs.insert(sf.sentence.clone(), sf.sign);
            }
        }
    }
    for (sentence, &sign) in &signs {
        let witness = || vec![SignedFormula { sign, sentence: sentence.clone() }];
        match sentence.formula() {
            Formula::Prop(_) | Formula::Pred(..) => {}
            Formula::Not(a) => {
                let child = canonicalize(a);
                if !rule_satisfied(logic, sign, ConnectiveKind::Neg, [Some(&child), None], &signs) {
                    violations.push(HintikkaViolation { clause: 2, witnesses: witness() });
                }
            }
            Formula::Box(a) => {
                let child = canonicalize(a);
                let clause = if sign.is_designated() { 3 } else { 4 };
                if !rule_satisfied(logic, sign, ConnectiveKind::Box, [Some(&child), None], &signs) {
                    violations.push(HintikkaViolation { clause, witnesses: witness() });
                }
            }
            Formula::Imp(a, b) => {
                let left = canonicalize(a);
                let right = canonicalize(b);
                let clause = 5 + sign.index() as u8;
                if !rule_satisfied(
                    logic,
                    sign,
                    ConnectiveKind::Imp,
                    [Some(&left), Some(&right)],
                    &signs,
                ) {
                    violations.push(HintikkaViolation { clause, witnesses: witness() });
                }
            }
            Formula::All(x, body) => {
                let inst_sign = |c: &String| {
                    let inst = substitute(body, x, &Term::Const(c.clone())).unwrap();
                    signs.get(&canonicalize(&inst)).copied()
                };
                let instances: Vec<Option<TruthValue>> = constants.iter().map(inst_sign).collect();
                use TruthValue::*;
                let ok = match sign {
                    // every instance is T
                    NecTrue => instances.iter().all(|s| *s == Some(NecTrue)),
                    // some instance t, the rest T or t
                    ConTrue => {
                        instances.contains(&Some(ConTrue))
                            && instances.iter().all(|s| matches!(s, Some(NecTrue) | Some(ConTrue)))
                    }
                    // some instance f, the rest T, t or f (in particular no
                    // F instance)
                    ConFalse => {
                        instances.contains(&Some(ConFalse))
                            && instances.iter().all(|s| {
                                matches!(s, Some(NecTrue) | Some(ConTrue) | Some(ConFalse))
                            })
                    }
                    // some instance F
                    NecFalse => instances.contains(&Some(NecFalse)),
                };
                if !ok {
                    let clause = 9 + sign.index() as u8;
                    violations.push(HintikkaViolation { clause, witnesses: witness() });
                }
            }
        }
    }
    violations.sort_by_key(|v| v.clause);
    HintikkaReport { violations }
}

/// Propositional Hintikka check directly on a saturation branch over the
/// shared DAG: returns the first violated clause, if any. Same clauses 1-8
/// as [`check_hintikka`], driven by the same rule tables.
pub fn check_hintikka_prop_dag(
    logic: Logic,
    dag: &PropDag,
    branch: &[(TruthValue, NodeId)],
) -> Option<(u8, NodeId)> {
    let mut signs: HashMap<NodeId, TruthValue> = HashMap::with_capacity(branch.len());
    for &(sign, id) in branch {
        match signs.get(&id) {
            Some(&s) if s != sign => return Some((1, id)),
            _ => {
                signs.insert(id, sign);
            }
        }
    }
    // report in branch acquisition order, so the first violation is stable
    for &(sign, id) in branch {
        let (kind, children) = match dag.op(id) {
            PropOp::Atom(_) => continue,
            PropOp::Not(a) => (ConnectiveKind::Neg, [a, a]),
            PropOp::Box(a) => (ConnectiveKind::Box, [a, a]),
            PropOp::Imp(a, b) => (ConnectiveKind::Imp, [a, b]),
        };
        let rule = prop_rule(logic, sign, kind);
        let ok = rule
            .branches
            .iter()
            .any(|alt| alt.iter().all(|&(s, which)| signs.get(&children[which as usize]) == Some(&s)));
        if !ok {
            let clause = match kind {
                ConnectiveKind::Neg => 2,
                ConnectiveKind::Box => {
                    if sign.is_designated() {
                        3
                    } else {
                        4
                    }
                }
                ConnectiveKind::Imp => 5 + sign.index() as u8,
            };
            return Some((clause, id));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Propositional extraction

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractError {
    /// A branch formula's sign is not a legal table output for the values of
    /// its subformulas; the branch was not open and saturated.
    NotSaturated { formula: String },
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::NotSaturated { formula } => {
                write!(f, "branch is not open and saturated at {formula}")
            }
        }
    }
}

impl std::error::Error for ExtractError {}

/// Reads an assignment off an open saturated propositional branch over the
/// shared DAG: branch formulas keep their sign, unconstrained subformulas
/// are completed bottom-up with the first table-legal value in the order
/// T, t, f, F (atoms default to T). The result is checked to be legal.
pub fn extract_prop_assignment_dag(
    logic: Logic,
    dag: &PropDag,
    branch: &[(TruthValue, NodeId)],
) -> Result<Vec<(NodeId, TruthValue)>, ExtractError> {
    let roots: Vec<NodeId> = branch.iter().map(|&(_, id)| id).collect();
    let closure = dag.closure(&roots);
    let mut constrained: HashMap<NodeId, TruthValue> = HashMap::with_capacity(branch.len());
    for &(sign, id) in branch {
        constrained.insert(id, sign);
    }
    let mut values: HashMap<NodeId, TruthValue> = HashMap::with_capacity(closure.len());
    for &id in &closure {
        let allowed: u8 = match dag.op(id) {
            PropOp::Atom(_) => 0b1111,
            PropOp::Not(a) => neg_op(values[&a]).mask(),
            PropOp::Box(a) => box_op(logic, values[&a]).mask(),
            PropOp::Imp(a, b) => imp_op(values[&a], values[&b]).mask(),
        };
        let v = match constrained.get(&id) {
            Some(&sign) => {
                if allowed & (1 << sign as u8) == 0 {
                    return Err(ExtractError::NotSaturated { formula: dag.render(id) });
                }
                sign
            }
            None => TruthValue::from_index(allowed.trailing_zeros() as u8),
        };
        values.insert(id, v);
    }
    Ok(closure.into_iter().map(|id| (id, values[&id])).collect())
}

/// Formula-level wrapper: extracts a legal assignment (as formula/value
/// pairs, subformulas before superformulas) from an open saturated
/// propositional branch.
pub fn extract_prop_countermodel(
    logic: Logic,
    branch: &[SignedFormula],
) -> Result<Vec<(Formula, TruthValue)>, ExtractError> {
    let mut dag = PropDag::new();
    let pairs: Vec<(TruthValue, NodeId)> = branch
        .iter()
        .map(|sf| {
            let id = dag
                .intern(sf.sentence.formula())
                .expect("propositional extraction expects propositional sentences");
            (sf.sign, id)
        })
        .collect();
    let assignment = extract_prop_assignment_dag(logic, &dag, &pairs)?;
    Ok(assignment.into_iter().map(|(id, v)| (dag.formula(id), v)).collect())
}

// ---------------------------------------------------------------------------
// First-order extraction

/// Builds a structure and valuation from an open first-order branch, as in
/// the model-existence argument: the domain is the set of branch constants
/// (one default element if none), every constant names itself, atomic values
/// are read off the branch with default `T`, and the valuation is completed
/// bottom-up over the instantiation closure of the branch sentences
/// (quantifier values forced, first legal value in order T,t,f,F otherwise).
pub fn extract_fo_countermodel(
    logic: Logic,
    branch: &Branch,
) -> Result<(Structure, FoValuation), ExtractError> {
    let signed = branch.signed_formulas();
    let mut constants: BTreeSet<String> = branch.constants();
    if constants.is_empty() {
        constants.insert("_e1".to_string());
    }
    let domain: Vec<String> = constants.iter().cloned().collect();
    let mut structure = Structure::new(domain.clone());
    for (i, c) in domain.iter().enumerate() {
        structure.add_constant(c, i);
    }
    let element = |name: &str| domain.iter().position(|d| d == name).unwrap();

    // predicate tables: default T, overridden by atomic signed formulas
    let mut preds: BTreeMap<String, usize> = BTreeMap::new();
    for sf in &signed {
        preds.extend(sf.sentence.formula().predicates());
    }
    for (p, arity) in &preds {
        structure.ensure_predicate(p, *arity);
    }
    for sf in &signed {
        if let Formula::Pred(p, args) = sf.sentence.formula() {
            let tuple: Vec<usize> = args.iter().map(|t| element(t.name())).collect();
            structure.set_pred_value(p, &tuple, sf.sign);
        }
    }

    // merged instantiation closure of all branch sentences; sorting by
    // complexity restores children-before-parents across roots
    let mut closure: Vec<Canonical> = Vec::new();
    let mut seen: HashMap<Canonical, ()> = HashMap::new();
    for sf in &signed {
        for c in instantiation_closure(sf.sentence.formula(), &domain) {
            if !seen.contains_key(&c) {
                seen.insert(c.clone(), ());
                closure.push(c);
            }
        }
    }
    closure.sort_by(|a, b| {
        crate::formula::complexity(a.formula())
            .cmp(&crate::formula::complexity(b.formula()))
            .then_with(|| a.cmp(b))
    });

    let mut constrained: HashMap<&Canonical, TruthValue> = HashMap::new();
    for sf in &signed {
        constrained.insert(&sf.sentence, sf.sign);
    }
    let mut values: HashMap<Canonical, TruthValue> = HashMap::with_capacity(closure.len());
    for c in &closure {
        let allowed: u8 = match c.formula() {
            Formula::Prop(_) => return Err(ExtractError::NotSaturated { formula: c.to_string() }),
            Formula::Pred(p, args) => {
                let tuple: Vec<usize> = args.iter().map(|t| element(t.name())).collect();
                ValueSet::singleton(structure.pred_value(p, &tuple)).mask()
            }
            Formula::Not(a) => neg_op(values[&canonicalize(a)]).mask(),
            Formula::Box(a) => box_op(logic, values[&canonicalize(a)]).mask(),
            Formula::Imp(a, b) => imp_op(values[&canonicalize(a)], values[&canonicalize(b)]).mask(),
            Formula::All(x, body) => {
                let mut set = 0u8;
                for cname in &domain {
                    let inst = substitute(body, x, &Term::Const(cname.clone())).unwrap();
                    set |= ValueSet::singleton(values[&canonicalize(&inst)]).mask();
                }
                ValueSet::singleton(forall_op(ValueSet::from_mask(set))).mask()
            }
        };
        let v = match constrained.get(c) {
            Some(&sign) => {
                if allowed & (1 << sign as u8) == 0 {
                    return Err(ExtractError::NotSaturated { formula: c.to_string() });
                }
                sign
            }
            None => TruthValue::from_index(allowed.trailing_zeros() as u8),
        };
        values.insert(c.clone(), v);
    }
    let entries: Vec<(Canonical, TruthValue)> =
        closure.into_iter().map(|c| (c.clone(), values[&c])).collect();
    Ok((structure, FoValuation::from_entries(entries)))
}


#[cfg(test)]
mod truncated_branch_tests {
    use super::*;
    use crate::parser::parse_with_inference;
    use crate::tableau::{run_systematic, TableauOutcome};
    use crate::truth::{Logic, NecFalse};

    /// Tableaux for the quantifier-swap non-theorem never finish, and a
    /// budget-truncated branch is not a Hintikka set: its universal
    /// sentences' forced values over the branch constants disagree with
    /// their signs. Extraction must refuse rather than emit a structure
    /// that verification would reject.
    #[test]
    fn truncated_branches_are_refused() {
        let (f, sig) =
            parse_with_inference("forall x . exists y . R(x,y) -> exists y . forall x . R(x,y)")
                .unwrap();
        for budget in [5, 20, 80] {
            let run = run_systematic(Logic::Tm, NecFalse, &f, &sig, budget);
            let TableauOutcome::Exhausted(branch) = run.outcome else {
                panic!("the swap tableau can neither close nor finish");
            };
            assert!(matches!(
                extract_fo_countermodel(Logic::Tm, &branch),
                Err(ExtractError::NotSaturated { .. })
            ));
        }
    }
}
