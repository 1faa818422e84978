//! Brute-force semantic decision procedure for propositional Tm, S4m and
//! S5m: enumerate every legal valuation over the subformula closure of the
//! inputs and decide validity and finite consequence. Independent of the
//! tableau engine; the two are cross-checked against each other.

use crate::formula::Formula;
use crate::propdag::{NodeId, NotPropositional, PropDag, PropOp};
use crate::truth::{box_op, imp_op, neg_op, Logic, TruthValue};
use std::fmt;

pub const DEFAULT_NODE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// The subformula closure is larger than the configured cap. The oracle
    /// is a desk-scale instrument; refuse rather than churn.
    NodeCapExceeded { nodes: usize, cap: usize },
    NotPropositional,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NodeCapExceeded { nodes, cap } => {
                write!(f, "subformula closure has {nodes} nodes, above the cap of {cap}")
            }
            OracleError::NotPropositional => f.write_str("oracle inputs must be propositional"),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<NotPropositional> for OracleError {
    fn from(_: NotPropositional) -> Self {
        OracleError::NotPropositional
    }
}

/// A choice of truth value for every subformula of a fixed closure, legal
/// for the selected logic's tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalAssignment {
    entries: Vec<(NodeId, TruthValue)>,
}

impl LocalAssignment {
    pub fn value_of(&self, id: NodeId) -> Option<TruthValue> {
        self.entries.iter().find(|(n, _)| *n == id).map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(NodeId, TruthValue)] {
        &self.entries
    }

    /// Rendered pairs in closure order (subformulas before superformulas).
    pub fn render(&self, dag: &PropDag) -> Vec<(String, TruthValue)> {
        self.entries.iter().map(|(id, v)| (dag.render(*id), *v)).collect()
    }
}

/// Closure + per-node instruction list shared by the enumeration routines.
struct Prepared {
    /// Global id per local slot, ascending.
    ids: Vec<NodeId>,
    /// Per slot: the operation with children remapped to local slots.
    ops: Vec<LocalOp>,
}

#[derive(Clone, Copy)]
enum LocalOp {
    Atom,
    Not(usize),
    Box(usize),
    Imp(usize, usize),
}

fn prepare(dag: &PropDag, roots: &[NodeId], cap: usize) -> Result<Prepared, OracleError> {
    let ids = dag.closure(roots);
    if ids.len() > cap {
        return Err(OracleError::NodeCapExceeded { nodes: ids.len(), cap });
    }
    let local = |id: NodeId| ids.binary_search(&id).expect("closure is downward closed");
    let ops = ids
        .iter()
        .map(|&id| match dag.op(id) {
            PropOp::Atom(_) => LocalOp::Atom,
            PropOp::Not(a) => LocalOp::Not(local(a)),
            PropOp::Box(a) => LocalOp::Box(local(a)),
            PropOp::Imp(a, b) => LocalOp::Imp(local(a), local(b)),
        })
        .collect();
    Ok(Prepared { ids, ops })
}

#[inline]
fn candidates(logic: Logic, op: LocalOp, vals: &[TruthValue]) -> u8 {
    match op {
        LocalOp::Atom => 0b1111,
        LocalOp::Not(a) => neg_op(vals[a]).mask(),
        LocalOp::Box(a) => box_op(logic, vals[a]).mask(),
        LocalOp::Imp(a, b) => imp_op(vals[a], vals[b]).mask(),
    }
}

/// Runs `visit` on every legal assignment, in the fixed enumeration order:
/// lexicographic over the closure (children before parents) with candidate
/// values tried in the order T, t, f, F. `visit` returns false to stop.
fn for_each_assignment(
    logic: Logic,
    prep: &Prepared,
    mut visit: impl FnMut(&[TruthValue]) -> bool,
) -> usize {
    let n = prep.ops.len();
    let mut count = 0usize;
    if n == 0 {
        return 0;
    }
    let mut vals = vec![TruthValue::NecTrue; n];
    let mut remaining = vec![0u8; n];
    let mut pos = 0usize;
    remaining[0] = candidates(logic, prep.ops[0], &vals);
    loop {
        if remaining[pos] == 0 {
            if pos == 0 {
                return count;
            }
            pos -= 1;
            continue;
        }
        let bit = remaining[pos].trailing_zeros() as u8;
        remaining[pos] &= remaining[pos] - 1;
        vals[pos] = TruthValue::from_index(bit);
        if pos + 1 == n {
            count += 1;
            if !visit(&vals) {
                return count;
            }
        } else {
            pos += 1;
            remaining[pos] = candidates(logic, prep.ops[pos], &vals);
        }
    }
}

/// Streams the legal assignments over the subformula closure of `roots`.
pub fn legal_assignments(
    logic: Logic,
    dag: &PropDag,
    roots: &[NodeId],
    node_cap: usize,
) -> Result<Vec<LocalAssignment>, OracleError> {
    let prep = prepare(dag, roots, node_cap)?;
    let mut out = Vec::new();
    for_each_assignment(logic, &prep, |vals| {
        out.push(LocalAssignment {
            entries: prep.ids.iter().copied().zip(vals.iter().copied()).collect(),
        });
        true
    });
    Ok(out)
}

/// Counts the legal assignments without materializing them.
pub fn count_assignments(
    logic: Logic,
    dag: &PropDag,
    roots: &[NodeId],
    node_cap: usize,
) -> Result<usize, OracleError> {
    let prep = prepare(dag, roots, node_cap)?;
    Ok(for_each_assignment(logic, &prep, |_| true))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropVerdict {
    Valid,
    /// The first assignment in enumeration order witnessing failure.
    Invalid(LocalAssignment),
}

impl PropVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, PropVerdict::Valid)
    }
}

/// Validity over the selected Nmatrix: every legal assignment gives the root
/// a designated value.
pub fn is_valid(
    logic: Logic,
    dag: &PropDag,
    root: NodeId,
    node_cap: usize,
) -> Result<PropVerdict, OracleError> {
    let prep = prepare(dag, &[root], node_cap)?;
    let root_slot = prep.ids.binary_search(&root).unwrap();
    let mut witness: Option<LocalAssignment> = None;
    for_each_assignment(logic, &prep, |vals| {
        if vals[root_slot].is_designated() {
            true
        } else {
            witness = Some(LocalAssignment {
                entries: prep.ids.iter().copied().zip(vals.iter().copied()).collect(),
            });
            false
        }
    });
    Ok(match witness {
        Some(w) => PropVerdict::Invalid(w),
        None => PropVerdict::Valid,
    })
}

/// Plain boolean validity on the hot path: no witness is built.
pub fn is_valid_fast(
    logic: Logic,
    dag: &PropDag,
    root: NodeId,
    node_cap: usize,
) -> Result<bool, OracleError> {
    let prep = prepare(dag, &[root], node_cap)?;
    let root_slot = prep.ids.binary_search(&root).unwrap();
    let mut valid = true;
    for_each_assignment(logic, &prep, |vals| {
        if vals[root_slot].is_designated() {
            true
        } else {
            valid = false;
            false
        }
    });
    Ok(valid)
}

/// Finite semantic consequence: every legal assignment designating all of
/// `premises` designates `conclusion`. With no premises this is validity.
pub fn consequence(
    logic: Logic,
    dag: &PropDag,
    premises: &[NodeId],
    conclusion: NodeId,
    node_cap: usize,
) -> Result<PropVerdict, OracleError> {
    let mut roots = premises.to_vec();
    roots.push(conclusion);
    let prep = prepare(dag, &roots, node_cap)?;
    let premise_slots: Vec<usize> =
        premises.iter().map(|p| prep.ids.binary_search(p).unwrap()).collect();
    let conclusion_slot = prep.ids.binary_search(&conclusion).unwrap();
    let mut witness: Option<LocalAssignment> = None;
    for_each_assignment(logic, &prep, |vals| {
        let premises_hold = premise_slots.iter().all(|&s| vals[s].is_designated());
        if !premises_hold || vals[conclusion_slot].is_designated() {
            true
        } else {
            witness = Some(LocalAssignment {
                entries: prep.ids.iter().copied().zip(vals.iter().copied()).collect(),
            });
            false
        }
    });
    Ok(match witness {
        Some(w) => PropVerdict::Invalid(w),
        None => PropVerdict::Valid,
    })
}

/// Formula-level wrapper around [`is_valid`].
pub fn is_valid_formula(
    logic: Logic,
    formula: &Formula,
    node_cap: usize,
) -> Result<(PropVerdict, PropDag), OracleError> {
    let mut dag = PropDag::new();
    let root = dag.intern(formula)?;
    let verdict = is_valid(logic, &dag, root, node_cap)?;
    Ok((verdict, dag))
}

/// Formula-level wrapper around [`consequence`].
pub fn consequence_formulas(
    logic: Logic,
    premises: &[Formula],
    conclusion: &Formula,
    node_cap: usize,
) -> Result<(PropVerdict, PropDag), OracleError> {
    let mut dag = PropDag::new();
    let premise_ids = premises.iter().map(|f| dag.intern(f)).collect::<Result<Vec<_>, _>>()?;
    let conclusion_id = dag.intern(conclusion)?;
    let verdict = consequence(logic, &dag, &premise_ids, conclusion_id, node_cap)?;
    Ok((verdict, dag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Signature;
    use crate::parser::parse;
    use crate::truth::{ConFalse, ConTrue, Logic::*};

    fn dag_with(text: &str) -> (PropDag, NodeId) {
        let mut dag = PropDag::new();
        let f = parse(text, &Signature::new()).unwrap();
        let id = dag.intern(&f).unwrap();
        (dag, id)
    }

    fn valid(logic: Logic, text: &str) -> bool {
        let (dag, id) = dag_with(text);
        is_valid(logic, &dag, id, DEFAULT_NODE_CAP).unwrap().is_valid()
    }

    #[test]
    fn assignment_counts() {
        let (dag, p) = dag_with("p");
        assert_eq!(count_assignments(Tm, &dag, &[p], 24).unwrap(), 4);

        let (dag, bp) = dag_with("[]p");
        // four leaf values, two box choices each
        assert_eq!(count_assignments(Tm, &dag, &[bp], 24).unwrap(), 8);
        // the S5m box is deterministic
        assert_eq!(count_assignments(S5m, &dag, &[bp], 24).unwrap(), 4);
    }

    #[test]
    fn axiom_t_and_its_failures() {
        assert!(valid(Tm, "[]p -> p"));
        assert!(valid(S4m, "[]p -> p"));
        assert!(valid(S5m, "[]p -> p"));
        assert!(!valid(Tm, "[](p -> p)"));
    }

    #[test]
    fn necessitation_of_tautology_witness() {
        let (dag, id) = dag_with("[](p -> p)");
        let verdict = is_valid(Tm, &dag, id, 24).unwrap();
        let PropVerdict::Invalid(w) = verdict else { panic!("expected invalid") };
        let rendered = w.render(&dag);
        assert_eq!(
            rendered,
            vec![
                ("p".to_string(), ConTrue),
                ("p -> p".to_string(), ConTrue),
                ("[](p -> p)".to_string(), ConFalse),
            ]
        );
    }

    #[test]
    fn four_and_five_axioms() {
        assert!(!valid(Tm, "[]p -> [][]p"));
        assert!(valid(S4m, "[]p -> [][]p"));
        assert!(valid(S5m, "[]p -> [][]p"));

        assert!(!valid(Tm, "~[]~[]p -> []p"));
        assert!(!valid(S4m, "~[]~[]p -> []p"));
        assert!(valid(S5m, "~[]~[]p -> []p"));
    }

    #[test]
    fn s4m_five_witness() {
        let (dag, id) = dag_with("~[]~[]p -> []p");
        let PropVerdict::Invalid(w) = is_valid(S4m, &dag, id, 24).unwrap() else {
            panic!("expected invalid")
        };
        let lookup = |text: &str| {
            let (entry_text, v) = w
                .render(&dag)
                .into_iter()
                .find(|(t, _)| t == text)
                .unwrap_or_else(|| panic!("no entry {text}"));
            assert_eq!(entry_text, text);
            v
        };
        assert_eq!(lookup("p"), ConTrue);
        assert_eq!(lookup("[]p"), ConFalse);
        assert_eq!(lookup("~[]p"), ConTrue);
        assert_eq!(lookup("[]~[]p"), ConFalse);
    }

    #[test]
    fn consequence_examples() {
        let sig = Signature::new();
        let p = parse("p", &sig).unwrap();
        let pq = parse("p -> q", &sig).unwrap();
        let q = parse("q", &sig).unwrap();
        for logic in Logic::ALL {
            let (v, _) = consequence_formulas(logic, &[p.clone(), pq.clone()], &q, 24).unwrap();
            assert!(v.is_valid(), "modus ponens in {logic}");
        }
        // p does not force []p
        let bp = parse("[]p", &sig).unwrap();
        let (v, _) = consequence_formulas(Tm, &[p.clone()], &bp, 24).unwrap();
        assert!(!v.is_valid());
        // empty premises = validity
        let t = parse("[]p -> p", &sig).unwrap();
        let (v, _) = consequence_formulas(Tm, &[], &t, 24).unwrap();
        assert!(v.is_valid());
    }

    #[test]
    fn verdicts_unchanged_by_unrelated_root() {
        let mut dag = PropDag::new();
        let sig = Signature::new();
        let f = dag.intern(&parse("[]p -> [][]p", &sig).unwrap()).unwrap();
        let unrelated = dag.intern(&parse("[]~q", &sig).unwrap()).unwrap();
        for logic in Logic::ALL {
            let alone = is_valid(logic, &dag, f, 24).unwrap().is_valid();
            let with_noise = consequence(logic, &dag, &[], f, 24).unwrap().is_valid();
            assert_eq!(alone, with_noise);
            // enumerating over a wider closure does not change designation
            let mut holds = true;
            let prep_roots = [f, unrelated];
            for a in legal_assignments(logic, &dag, &prep_roots, 24).unwrap() {
                if !a.value_of(f).unwrap().is_designated() {
                    holds = false;
                    break;
                }
            }
            assert_eq!(alone, holds);
        }
    }

    #[test]
    fn legality_inclusion_across_logics() {
        // every S5m-legal assignment is S4m-legal, and every S4m-legal one
        // is Tm-legal (box-table inclusion, checked per node)
        let (dag, id) = dag_with("[](p -> []q) -> ~[]~p");
        let check = |finer: Logic, coarser: Logic| {
            for a in legal_assignments(finer, &dag, &[id], 24).unwrap() {
                for (node, v) in a.entries() {
                    let allowed = match dag.op(*node) {
                        PropOp::Atom(_) => continue,
                        PropOp::Not(x) => neg_op(a.value_of(x).unwrap()),
                        PropOp::Box(x) => box_op(coarser, a.value_of(x).unwrap()),
                        PropOp::Imp(x, y) => {
                            imp_op(a.value_of(x).unwrap(), a.value_of(y).unwrap())
                        }
                    };
                    assert!(allowed.contains(*v));
                }
            }
        };
        check(S5m, S4m);
        check(S4m, Tm);
        check(S5m, Tm);
    }

    #[test]
    fn node_cap_enforced() {
        let (dag, id) = dag_with("[](p -> []q) -> ~[]~p");
        let err = is_valid(Tm, &dag, id, 3).unwrap_err();
        assert!(matches!(err, OracleError::NodeCapExceeded { .. }));
    }
}
