//! Finite-domain semantics for the starred systems: four-valued modal
//! structures, enumeration of legal valuations over the instantiation
//! closure of a sentence, bounded countermodel search, and countermodel
//! verification.

use crate::formula::{canonicalize, substitute, universal_closure, Canonical, Formula, Term};
use crate::truth::{box_op, forall_op, imp_op, neg_op, Logic, TruthValue, ValueSet};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// A four-valued modal structure: a finite non-empty ordered domain, a
/// four-valued table per predicate and an element per constant. Every domain
/// element left unnamed by a constant receives a naming constant `_e<i>`
/// (the diagram expansion), so quantifier instances range over all elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    domain: Vec<String>,
    preds: BTreeMap<String, PredTable>,
    consts: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PredTable {
    arity: usize,
    /// Row-major over element tuples, last coordinate fastest.
    values: Vec<TruthValue>,
}

impl Structure {
    pub fn new(domain: Vec<String>) -> Structure {
        assert!(!domain.is_empty(), "the domain of a structure is non-empty");
        Structure { domain, preds: BTreeMap::new(), consts: Vec::new() }
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn add_constant(&mut self, name: &str, element: usize) {
        assert!(element < self.domain.len());
        self.consts.push((name.to_string(), element));
    }

    /// Declares a predicate with every entry defaulted to `T`.
    pub fn ensure_predicate(&mut self, name: &str, arity: usize) {
        let size = self.domain.len().pow(arity as u32);
        self.preds
            .entry(name.to_string())
            .or_insert_with(|| PredTable { arity, values: vec![TruthValue::NecTrue; size] });
    }

    pub fn set_pred_value(&mut self, name: &str, tuple: &[usize], value: TruthValue) {
        let n = self.domain.len();
        let table = self.preds.get_mut(name).expect("predicate not declared");
        assert_eq!(table.arity, tuple.len());
        let idx = tuple.iter().fold(0usize, |acc, &e| acc * n + e);
        table.values[idx] = value;
    }

    /// Value of a predicate on an element tuple; unknown predicates and
    /// entries default to `T` (the arbitrary-value convention used when
    /// reading structures off open branches).
    pub fn pred_value(&self, name: &str, tuple: &[usize]) -> TruthValue {
        let n = self.domain.len();
        match self.preds.get(name) {
            None => TruthValue::NecTrue,
            Some(table) => {
                debug_assert_eq!(table.arity, tuple.len());
                let idx = tuple.iter().fold(0usize, |acc, &e| acc * n + e);
                table.values[idx]
            }
        }
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.iter().map(|(n, t)| (n.as_str(), t.arity))
    }

    pub fn constants(&self) -> &[(String, usize)] {
        &self.consts
    }

    pub fn constant_element(&self, name: &str) -> Option<usize> {
        self.consts.iter().find(|(c, _)| c == name).map(|(_, e)| *e)
    }

    /// The constants of the expanded signature in pool order: declared
    /// constants first, then a naming constant per unnamed element.
    pub fn named_constants(&self) -> Vec<(String, usize)> {
        let mut out = self.consts.clone();
        for e in 0..self.domain.len() {
            if !out.iter().any(|(_, el)| *el == e) {
                out.push((format!("_e{}", e + 1), e));
            }
        }
        out
    }
}

/// The instantiation closure of a sentence: the least set containing its
/// canonical form, closed under immediate subsentences and, for each
/// universal sentence, its instances over the given constants. Ordered with
/// children before parents (a topological order for evaluation).
pub fn instantiation_closure(sentence: &Formula, constants: &[String]) -> Vec<Canonical> {
    fn visit(
        f: &Canonical,
        constants: &[String],
        order: &mut Vec<Canonical>,
        seen: &mut HashMap<Canonical, ()>,
    ) {
        if seen.contains_key(f) {
            return;
        }
        seen.insert(f.clone(), ());
        match f.formula() {
            Formula::Prop(_) | Formula::Pred(..) => {}
            Formula::Not(a) | Formula::Box(a) => {
                visit(&canonicalize(a), constants, order, seen);
            }
            Formula::Imp(a, b) => {
                visit(&canonicalize(a), constants, order, seen);
                visit(&canonicalize(b), constants, order, seen);
            }
            Formula::All(x, body) => {
                for c in constants {
                    let inst = substitute(body, x, &Term::Const(c.clone()))
                        .expect("constants are free for any variable");
                    visit(&canonicalize(&inst), constants, order, seen);
                }
            }
        }
        order.push(f.clone());
    }
    let mut order = Vec::new();
    let mut seen = HashMap::new();
    visit(&canonicalize(sentence), constants, &mut order, &mut seen);
    order
}

/// A valuation over an instantiation closure: one truth value per canonical
/// sentence, obeying the valuation clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoValuation {
    entries: Vec<(Canonical, TruthValue)>,
}

impl FoValuation {
    pub fn from_entries(entries: Vec<(Canonical, TruthValue)>) -> FoValuation {
        FoValuation { entries }
    }

    pub fn value_of(&self, sentence: &Canonical) -> Option<TruthValue> {
        self.entries.iter().find(|(s, _)| s == sentence).map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(Canonical, TruthValue)] {
        &self.entries
    }
}

enum FoOp {
    Atom(TruthValue),
    Not(usize),
    Box(usize),
    Imp(usize, usize),
    All(Vec<usize>),
}

struct FoPrepared {
    closure: Vec<Canonical>,
    ops: Vec<FoOp>,
}

fn prepare_fo(structure: &Structure, sentence: &Formula) -> FoPrepared {
    let named = structure.named_constants();
    let const_names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let elem_of: HashMap<&str, usize> = named.iter().map(|(n, e)| (n.as_str(), *e)).collect();
    let closure = instantiation_closure(sentence, &const_names);
    let index: HashMap<&Canonical, usize> =
        closure.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let ops = closure
        .iter()
        .map(|c| match c.formula() {
            Formula::Prop(_) => unreachable!("first-order sentences carry no propositional atoms"),
            Formula::Pred(p, args) => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(name) => *elem_of
                            .get(name.as_str())
                            .unwrap_or_else(|| panic!("constant {name} not interpreted")),
                        Term::Var(v) => panic!("free variable {v} in closed atom"),
                    })
                    .collect();
                FoOp::Atom(structure.pred_value(p, &tuple))
            }
            Formula::Not(a) => FoOp::Not(index[&canonicalize(a)]),
            Formula::Box(a) => FoOp::Box(index[&canonicalize(a)]),
            Formula::Imp(a, b) => FoOp::Imp(index[&canonicalize(a)], index[&canonicalize(b)]),
            Formula::All(x, body) => {
                let mut slots = Vec::with_capacity(const_names.len());
                for cname in &const_names {
                    let inst = substitute(body, x, &Term::Const(cname.clone())).unwrap();
                    slots.push(index[&canonicalize(&inst)]);
                }
                FoOp::All(slots)
            }
        })
        .collect();
    FoPrepared { closure, ops }
}

fn fo_candidates(logic: Logic, op: &FoOp, vals: &[TruthValue]) -> u8 {
    match op {
        FoOp::Atom(v) => ValueSet::singleton(*v).mask(),
        FoOp::Not(a) => neg_op(vals[*a]).mask(),
        FoOp::Box(a) => box_op(logic, vals[*a]).mask(),
        FoOp::Imp(a, b) => imp_op(vals[*a], vals[*b]).mask(),
        FoOp::All(slots) => {
            let mut set = 0u8;
            for &s in slots {
                set |= ValueSet::singleton(vals[s]).mask();
            }
            ValueSet::singleton(forall_op(ValueSet::from_mask(set))).mask()
        }
    }
}

fn for_each_fo_valuation(
    logic: Logic,
    prep: &FoPrepared,
    mut visit: impl FnMut(&[TruthValue]) -> bool,
) {
    let n = prep.ops.len();
    let mut vals = vec![TruthValue::NecTrue; n];
    let mut remaining = vec![0u8; n];
    let mut pos = 0usize;
    remaining[0] = fo_candidates(logic, &prep.ops[0], &vals);
    loop {
        if remaining[pos] == 0 {
            if pos == 0 {
                return;
            }
            pos -= 1;
            continue;
        }
        let bit = remaining[pos].trailing_zeros() as u8;
        remaining[pos] &= remaining[pos] - 1;
        vals[pos] = TruthValue::from_index(bit);
        if pos + 1 == n {
            if !visit(&vals) {
                return;
            }
        } else {
            pos += 1;
            remaining[pos] = fo_candidates(logic, &prep.ops[pos], &vals);
        }
    }
}

/// Streams every legal valuation of `sentence` over `structure`. Atomic and
/// universal sentences are forced (clauses 1 and 5), negation is forced, so
/// only box and implication nodes branch.
pub fn legal_fo_valuations(
    logic: Logic,
    structure: &Structure,
    sentence: &Formula,
) -> Vec<FoValuation> {
    let prep = prepare_fo(structure, sentence);
    let mut out = Vec::new();
    for_each_fo_valuation(logic, &prep, |vals| {
        out.push(FoValuation {
            entries: prep.closure.iter().cloned().zip(vals.iter().copied()).collect(),
        });
        true
    });
    out
}

/// Per-node count of value candidates along the first enumeration path.
/// Negation, atoms and quantifiers never branch.
pub fn choice_profile(logic: Logic, structure: &Structure, sentence: &Formula) -> Vec<usize> {
    let prep = prepare_fo(structure, sentence);
    let mut profile = vec![0usize; prep.ops.len()];
    let mut vals = vec![TruthValue::NecTrue; prep.ops.len()];
    for (i, op) in prep.ops.iter().enumerate() {
        let mask = fo_candidates(logic, op, &vals);
        profile[i] = mask.count_ones() as usize;
        vals[i] = TruthValue::from_index(mask.trailing_zeros() as u8);
    }
    profile
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedVerdict {
    /// No countermodel with domain size up to the bound; an incomplete
    /// verdict by design.
    ValidUpTo(usize),
    Countermodel(Box<Structure>, FoValuation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// The structure space exceeded the configured cap.
    ResourceCap { examined: usize, cap: usize },
    NotFirstOrder,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ResourceCap { examined, cap } => write!(
                f,
                "countermodel search examined {examined} structures, above the cap of {cap}"
            ),
            ModelError::NotFirstOrder => f.write_str("bounded search expects a first-order formula"),
        }
    }
}

impl std::error::Error for ModelError {}

pub const DEFAULT_STRUCTURE_CAP: usize = 1_000_000;

/// Searches all structures with domain size up to `max_domain` (domain sizes
/// ascending, predicate tables in lexicographic value order T,t,f,F, constant
/// maps lexicographic) and all legal valuations for one giving the sentence a
/// non-designated value. Free variables are universally closed first.
pub fn bounded_validity(
    logic: Logic,
    formula: &Formula,
    max_domain: usize,
    structure_cap: usize,
) -> Result<BoundedVerdict, ModelError> {
    assert!(max_domain >= 1);
    if formula.contains_prop_atom() {
        return Err(ModelError::NotFirstOrder);
    }
    let sentence = universal_closure(formula);
    let preds: Vec<(String, usize)> = sentence.predicates().into_iter().collect();
    let consts: Vec<String> = sentence.constants().into_iter().collect();
    let mut examined = 0usize;
    for n in 1..=max_domain {
        let domain: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
        let table_sizes: Vec<usize> = preds.iter().map(|(_, a)| n.pow(*a as u32)).collect();
        let total_cells: usize = table_sizes.iter().sum();
        let mut cells = vec![0u8; total_cells];
        'tables: loop {
            let mut const_map = vec![0usize; consts.len()];
            'consts: loop {
                examined += 1;
                if examined > structure_cap {
                    return Err(ModelError::ResourceCap { examined, cap: structure_cap });
                }
                let mut structure = Structure::new(domain.clone());
                for (c, &e) in consts.iter().zip(const_map.iter()) {
                    structure.add_constant(c, e);
                }
                let mut offset = 0;
                for ((p, arity), &size) in preds.iter().zip(table_sizes.iter()) {
                    structure.ensure_predicate(p, *arity);
                    let table = structure.preds.get_mut(p).unwrap();
                    for (slot, value) in table.values.iter_mut().zip(&cells[offset..offset + size])
                    {
                        *slot = TruthValue::from_index(*value);
                    }
                    offset += size;
                }
                let prep = prepare_fo(&structure, &sentence);
                let root = prep.ops.len() - 1;
                let mut witness: Option<FoValuation> = None;
                for_each_fo_valuation(logic, &prep, |vals| {
                    if vals[root].is_designated() {
                        true
                    } else {
                        witness = Some(FoValuation {
                            entries: prep
                                .closure
                                .iter()
                                .cloned()
                                .zip(vals.iter().copied())
                                .collect(),
                        });
                        false
                    }
                });
                if let Some(v) = witness {
                    return Ok(BoundedVerdict::Countermodel(Box::new(structure), v));
                }
                // advance the constant map, last constant fastest
                let mut i = const_map.len();
                loop {
                    if i == 0 {
                        break 'consts;
                    }
                    i -= 1;
                    const_map[i] += 1;
                    if const_map[i] < n {
                        break;
                    }
                    const_map[i] = 0;
                }
            }
            // advance the predicate tables, last cell fastest
            let mut i = cells.len();
            loop {
                if i == 0 {
                    break 'tables;
                }
                i -= 1;
                cells[i] += 1;
                if cells[i] < 4 {
                    break;
                }
                cells[i] = 0;
            }
        }
    }
    Ok(BoundedVerdict::ValidUpTo(max_domain))
}

/// A violated valuation clause, reported with the offending sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseViolation {
    /// 1 atomic, 2 negation, 3 box, 4 implication, 5 quantifier, 6 missing
    /// entry; 0 means the root is designated (not a countermodel).
    pub clause: u8,
    pub sentence: String,
}

impl fmt::Display for ClauseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause == 0 {
            write!(f, "root {} is designated", self.sentence)
        } else {
            write!(f, "clause {} violated at {}", self.clause, self.sentence)
        }
    }
}

impl std::error::Error for ClauseViolation {}

/// Checks that `valuation` satisfies every valuation clause over the
/// instantiation closure of `sentence` and gives it a non-designated value.
/// Variant coherence holds structurally: valuations are keyed on canonical
/// forms.
pub fn verify_countermodel(
    logic: Logic,
    structure: &Structure,
    valuation: &FoValuation,
    sentence: &Formula,
) -> Result<(), ClauseViolation> {
    let named = structure.named_constants();
    let const_names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let elem_of: HashMap<&str, usize> = named.iter().map(|(n, e)| (n.as_str(), *e)).collect();
    let closure = instantiation_closure(sentence, &const_names);
    let value = |c: &Canonical| -> Result<TruthValue, ClauseViolation> {
        valuation
            .value_of(c)
            .ok_or_else(|| ClauseViolation { clause: 6, sentence: c.to_string() })
    };
    for c in &closure {
        let v = value(c)?;
        let violation = |clause: u8| ClauseViolation { clause, sentence: c.to_string() };
        match c.formula() {
            Formula::Prop(_) => return Err(violation(1)),
            Formula::Pred(p, args) => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|t| elem_of.get(t.name()).copied().ok_or_else(|| violation(1)))
                    .collect::<Result<_, _>>()?;
                if structure.pred_value(p, &tuple) != v {
                    return Err(violation(1));
                }
            }
            Formula::Not(a) => {
                if !neg_op(value(&canonicalize(a))?).contains(v) {
                    return Err(violation(2));
                }
            }
            Formula::Box(a) => {
                if !box_op(logic, value(&canonicalize(a))?).contains(v) {
                    return Err(violation(3));
                }
            }
            Formula::Imp(a, b) => {
                let va = value(&canonicalize(a))?;
                let vb = value(&canonicalize(b))?;
                if !imp_op(va, vb).contains(v) {
                    return Err(violation(4));
                }
            }
            Formula::All(x, body) => {
                let mut set = 0u8;
                for cname in &const_names {
                    let inst = substitute(body, x, &Term::Const(cname.clone())).unwrap();
                    set |= ValueSet::singleton(value(&canonicalize(&inst))?).mask();
                }
                if forall_op(ValueSet::from_mask(set)) != v {
                    return Err(violation(5));
                }
            }
        }
    }
    let root = value(&canonicalize(sentence))?;
    if root.is_designated() {
        return Err(ClauseViolation { clause: 0, sentence: sentence.to_string() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Signature;
    use crate::parser::parse;
    use crate::truth::Logic::*;
    use crate::truth::{ConFalse, ConTrue, NecFalse, NecTrue};

    fn fsig() -> Signature {
        let mut s = Signature::new();
        s.add_predicate("P", 1).unwrap();
        s.add_predicate("R", 2).unwrap();
        s.add_constant("c").unwrap();
        s
    }

    #[test]
    fn closure_examples() {
        let sig = fsig();
        let atom = parse("P(c)", &sig).unwrap();
        let cl = instantiation_closure(&atom, &["c".into()]);
        assert_eq!(cl.len(), 1);

        let all = parse("forall x . P(x)", &sig).unwrap();
        let cl = instantiation_closure(&all, &["c".into(), "d".into()]);
        let texts: Vec<String> = cl.iter().map(|c| c.to_string()).collect();
        assert_eq!(texts, vec!["P(c)", "P(d)", "forall x1 . P(x1)"]);

        let boxed = parse("[] forall x . P(x)", &sig).unwrap();
        let cl = instantiation_closure(&boxed, &["c".into()]);
        let texts: Vec<String> = cl.iter().map(|c| c.to_string()).collect();
        assert_eq!(texts, vec!["P(c)", "forall x1 . P(x1)", "[]forall x1 . P(x1)"]);
    }

    #[test]
    fn forced_quantifier_values() {
        let sig = fsig();
        let all = parse("forall x . P(x)", &sig).unwrap();

        let mut one = Structure::new(vec!["u".into()]);
        one.ensure_predicate("P", 1);
        one.set_pred_value("P", &[0], NecTrue);
        for v in legal_fo_valuations(Tm, &one, &all) {
            assert_eq!(v.value_of(&canonicalize(&all)), Some(NecTrue));
        }

        let mut two = Structure::new(vec!["u1".into(), "u2".into()]);
        two.ensure_predicate("P", 1);
        two.set_pred_value("P", &[0], ConTrue);
        two.set_pred_value("P", &[1], ConFalse);
        for v in legal_fo_valuations(Tm, &two, &all) {
            assert_eq!(v.value_of(&canonicalize(&all)), Some(ConFalse));
        }
    }

    #[test]
    fn forced_box_in_s5m() {
        let sig = fsig();
        let f = parse("[]P(c)", &sig).unwrap();
        let mut s = Structure::new(vec!["u".into()]);
        s.add_constant("c", 0);
        s.ensure_predicate("P", 1);
        s.set_pred_value("P", &[0], ConTrue);
        let vals = legal_fo_valuations(S5m, &s, &f);
        assert_eq!(vals.len(), 1);
        assert_eq!(vals[0].value_of(&canonicalize(&f)), Some(NecFalse));
    }

    #[test]
    fn only_box_and_imp_branch() {
        let sig = fsig();
        let f = parse("forall x . ~(P(x) -> []~P(x))", &sig).unwrap();
        let mut s = Structure::new(vec!["u1".into(), "u2".into()]);
        s.ensure_predicate("P", 1);
        for choices in choice_profile(Tm, &s, &f) {
            assert!((1..=2).contains(&choices));
        }
        // a box-free, implication-free sentence admits exactly one valuation
        let g = parse("forall x . ~P(x)", &sig).unwrap();
        assert_eq!(legal_fo_valuations(Tm, &s, &g).len(), 1);
    }

    #[test]
    fn bounded_validity_examples() {
        let sig = fsig();
        let bf = parse("forall x . []P(x) -> [] forall x . P(x)", &sig).unwrap();
        assert_eq!(
            bounded_validity(Tm, &bf, 2, DEFAULT_STRUCTURE_CAP).unwrap(),
            BoundedVerdict::ValidUpTo(2)
        );

        let ax4 = parse("forall x . P(x) -> P(c)", &sig).unwrap();
        assert_eq!(
            bounded_validity(Tm, &ax4, 1, DEFAULT_STRUCTURE_CAP).unwrap(),
            BoundedVerdict::ValidUpTo(1)
        );

        let swap =
            parse("forall x . exists y . R(x,y) -> exists y . forall x . R(x,y)", &sig).unwrap();
        match bounded_validity(Tm, &swap, 2, DEFAULT_STRUCTURE_CAP).unwrap() {
            BoundedVerdict::Countermodel(structure, valuation) => {
                assert_eq!(structure.domain().len(), 2);
                verify_countermodel(Tm, &structure, &valuation, &swap).unwrap();
            }
            other => panic!("expected countermodel, got {other:?}"),
        }
    }

    #[test]
    fn bounded_validity_is_deterministic() {
        let sig = fsig();
        let swap =
            parse("forall x . exists y . R(x,y) -> exists y . forall x . R(x,y)", &sig).unwrap();
        let a = bounded_validity(S4m, &swap, 2, DEFAULT_STRUCTURE_CAP).unwrap();
        let b = bounded_validity(S4m, &swap, 2, DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resource_cap() {
        let sig = fsig();
        // a valid formula forces the search to sweep the whole space
        let f = parse("forall x . P(x) -> P(c)", &sig).unwrap();
        assert!(matches!(bounded_validity(Tm, &f, 2, 3), Err(ModelError::ResourceCap { .. })));
    }

    #[test]
    fn verify_rejects_bad_valuations() {
        let sig = fsig();
        let f = parse("~P(c)", &sig).unwrap();
        let mut s = Structure::new(vec!["u".into()]);
        s.add_constant("c", 0);
        s.ensure_predicate("P", 1);
        s.set_pred_value("P", &[0], ConTrue);
        let atom = canonicalize(&parse("P(c)", &sig).unwrap());
        let root = canonicalize(&f);
        // negation has no fixed point: v(~P(c)) = v(P(c)) violates clause 2
        let bad = FoValuation::from_entries(vec![(atom, ConTrue), (root, ConTrue)]);
        let err = verify_countermodel(Tm, &s, &bad, &f).unwrap_err();
        assert_eq!(err.clause, 2);

        // an F instance forces the universal to F (clause 5)
        let all = parse("forall x . P(x)", &sig).unwrap();
        let mut s2 = Structure::new(vec!["u".into()]);
        s2.ensure_predicate("P", 1);
        assert_eq!(s2.named_constants(), vec![("_e1".to_string(), 0)]);
        s2.set_pred_value("P", &[0], NecFalse);
        let inst = canonicalize(&Formula::pred("P", vec![Term::Const("_e1".into())]));
        let allc = canonicalize(&all);
        let bad = FoValuation::from_entries(vec![(inst, NecFalse), (allc, ConFalse)]);
        let err = verify_countermodel(Tm, &s2, &bad, &all).unwrap_err();
        assert_eq!(err.clause, 5);
    }

    #[test]
    fn universal_closure_faithfulness() {
        // all instances designated iff the universal closure is designated,
        // under the same valuation
        let sig = fsig();
        let open = parse("P(x) -> []P(x)", &sig).unwrap();
        let closed = universal_closure(&open);
        let Formula::All(x, body) = &closed else { panic!() };
        for n in 1..=2usize {
            let domain: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
            let mut s = Structure::new(domain);
            s.ensure_predicate("P", 1);
            s.set_pred_value("P", &[0], ConTrue);
            for v in legal_fo_valuations(Tm, &s, &closed) {
                let all_inst = s.named_constants().iter().all(|(c, _)| {
                    let inst = substitute(body, x, &Term::Const(c.clone())).unwrap();
                    v.value_of(&canonicalize(&inst)).unwrap().is_designated()
                });
                let whole = v.value_of(&canonicalize(&closed)).unwrap().is_designated();
                assert_eq!(all_inst, whole);
            }
        }
    }

    #[test]
    fn variant_coherence_is_structural() {
        // v(forall x . P(c)) = v(P(c)) automatically: both canonicalize to
        // the same key
        let sig = fsig();
        let padded = parse("forall x . P(c)", &sig).unwrap();
        let plain = parse("P(c)", &sig).unwrap();
        assert_eq!(canonicalize(&padded), canonicalize(&plain));
        let mut s = Structure::new(vec!["u".into()]);
        s.add_constant("c", 0);
        s.ensure_predicate("P", 1);
        s.set_pred_value("P", &[0], ConFalse);
        for v in legal_fo_valuations(Tm, &s, &padded) {
            assert_eq!(v.value_of(&canonicalize(&plain)), Some(ConFalse));
        }
    }
}
