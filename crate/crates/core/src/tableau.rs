//! The signed-tableau calculus: propositional rule tables for the three
//! logics, quantifier rules with their provisos, variant-aware closure, a
//! terminating propositional saturation procedure, and the fair systematic
//! first-order procedure with marked signed formulas.
//!
//! Provability of a sentence means closed tableaux from both refutation
//! signs `F` and `f`.

use crate::formula::{canonicalize, substitute, universal_closure, Canonical, Formula, Signature, Term};
use crate::propdag::{NodeId, NotPropositional, PropDag, PropOp};
use crate::truth::{ConFalse, ConTrue, Logic, NecFalse, NecTrue, TruthValue};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

// ---------------------------------------------------------------------------
// Signed formulas and branches

/// A signed formula `L:phi`. The sentence is kept in canonical form, so sign
/// lookups decide the variant relation by plain equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedFormula {
    pub sign: TruthValue,
    pub sentence: Canonical,
}

impl SignedFormula {
    pub fn new(sign: TruthValue, formula: &Formula) -> SignedFormula {
        SignedFormula { sign, sentence: canonicalize(formula) }
    }
}

impl fmt::Display for SignedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.sign, self.sentence)
    }
}

/// A reusable quantifier node `t:forall x psi:[c]` or `f:forall x psi:[c]`:
/// the signed formula to be reused plus the constant its first use consumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedSignedFormula {
    pub sign: TruthValue,
    pub sentence: Canonical,
    pub mark: String,
}

impl fmt::Display for MarkedSignedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:[{}]", self.sign, self.sentence, self.mark)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Entry {
    Signed(SignedFormula),
    Marked(MarkedSignedFormula),
}

impl Entry {
    pub fn signed(sign: TruthValue, formula: &Formula) -> Entry {
        Entry::Signed(SignedFormula::new(sign, formula))
    }

    pub fn as_signed(&self) -> Option<&SignedFormula> {
        match self {
            Entry::Signed(s) => Some(s),
            Entry::Marked(_) => None,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Signed(s) => s.fmt(f),
            Entry::Marked(m) => m.fmt(f),
        }
    }
}

/// True iff the branch contains two signed formulas with variant sentences
/// and distinct signs.
pub fn is_branch_closed(branch: &[SignedFormula]) -> bool {
    let mut seen: HashMap<&Canonical, TruthValue> = HashMap::new();
    for sf in branch {
        match seen.get(&sf.sentence) {
            Some(&sign) if sign != sf.sign => return true,
            Some(_) => {}
            None => {
                seen.insert(&sf.sentence, sf.sign);
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Propositional rule tables
//
// Every rule branches over exactly the input tuples whose multioperator
// output contains the premise sign, with the compressed presentation for
// T:-> (an F antecedent or a T consequent alone suffices).

/// Index of the subformula a consequence refers to: 0 = only/left child,
/// 1 = right child.
pub type RuleBranch = &'static [(TruthValue, u8)];

#[derive(Debug)]
pub struct PropRule {
    pub name: &'static str,
    /// One entry per branch the rule opens; empty means the branch closes.
    pub branches: &'static [RuleBranch],
}

const fn rule(name: &'static str, branches: &'static [RuleBranch]) -> PropRule {
    PropRule { name, branches }
}

static NEG_RULES: [PropRule; 4] = [
    rule("T:~", &[&[(NecFalse, 0)]]),
    rule("t:~", &[&[(ConFalse, 0)]]),
    rule("f:~", &[&[(ConTrue, 0)]]),
    rule("F:~", &[&[(NecTrue, 0)]]),
];

static BOX_RULES_TM: [PropRule; 4] = [
    rule("T:[]", &[&[(NecTrue, 0)]]),
    rule("t:[]", &[&[(NecTrue, 0)]]),
    rule("f:[]", &[&[(ConTrue, 0)], &[(ConFalse, 0)], &[(NecFalse, 0)]]),
    rule("F:[]", &[&[(ConTrue, 0)], &[(ConFalse, 0)], &[(NecFalse, 0)]]),
];

static BOX_RULES_S4M: [PropRule; 4] = [
    rule("T:[]", &[&[(NecTrue, 0)]]),
    rule("t:[]", &[]),
    rule("f:[]", &[&[(ConTrue, 0)], &[(ConFalse, 0)], &[(NecFalse, 0)]]),
    rule("F:[]", &[&[(ConTrue, 0)], &[(ConFalse, 0)], &[(NecFalse, 0)]]),
];

static BOX_RULES_S5M: [PropRule; 4] = [
    rule("T:[]", &[&[(NecTrue, 0)]]),
    rule("t:[]", &[]),
    rule("f:[]", &[]),
    rule("F:[]", &[&[(ConTrue, 0)], &[(ConFalse, 0)], &[(NecFalse, 0)]]),
];

static IMP_RULES: [PropRule; 4] = [
    rule(
        "T:->",
        &[
            &[(NecFalse, 0)],
            &[(ConTrue, 0), (ConTrue, 1)],
            &[(ConFalse, 0), (ConTrue, 1)],
            &[(ConFalse, 0), (ConFalse, 1)],
            &[(NecTrue, 1)],
        ],
    ),
    // The implication table also allows value t at the pair (f, F), so the
    // t:-> rule carries a fifth branch for it; without that branch a tableau
    // can close past the valuation choosing f for the antecedent and F for
    // the consequent, wrongly "proving" an invalid formula.
    rule(
        "t:->",
        &[
            &[(NecTrue, 0), (ConTrue, 1)],
            &[(ConTrue, 0), (ConTrue, 1)],
            &[(ConFalse, 0), (ConTrue, 1)],
            &[(ConFalse, 0), (ConFalse, 1)],
            &[(ConFalse, 0), (NecFalse, 1)],
        ],
    ),
    rule(
        "f:->",
        &[
            &[(NecTrue, 0), (ConFalse, 1)],
            &[(ConTrue, 0), (ConFalse, 1)],
            &[(ConTrue, 0), (NecFalse, 1)],
        ],
    ),
    rule("F:->", &[&[(NecTrue, 0), (NecFalse, 1)]]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectiveKind {
    Neg,
    Box,
    Imp,
}

/// The unique propositional rule for a sign and top connective.
pub fn prop_rule(logic: Logic, sign: TruthValue, kind: ConnectiveKind) -> &'static PropRule {
    let i = sign.index();
    match kind {
        ConnectiveKind::Neg => &NEG_RULES[i],
        ConnectiveKind::Imp => &IMP_RULES[i],
        ConnectiveKind::Box => match logic {
            Logic::Tm => &BOX_RULES_TM[i],
            Logic::S4m => &BOX_RULES_S4M[i],
            Logic::S5m => &BOX_RULES_S5M[i],
        },
    }
}

// ---------------------------------------------------------------------------
// Propositional saturation on the shared subformula DAG
//
// Branch state is a sign array over the closure plus two pending bitsets;
// alternatives are explored depth-first with an operation trail for undo.
// On a branch each subformula carries at most one sign (a second, different
// sign closes the branch), so closure detection is a single array lookup.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropSaturation {
    Closed,
    /// The first open saturated branch in exploration order, as signed
    /// DAG nodes in acquisition order.
    Open(Vec<(TruthValue, NodeId)>),
}

const UNSET: u8 = u8::MAX;

/// Pending-slot set. One machine word covers every realistic closure; the
/// vector fallback keeps the termination contract unconditional.
trait PendingSet {
    fn empty(slots: usize) -> Self;
    fn set(&mut self, slot: u32);
    fn clear(&mut self, slot: u32);
    fn lowest(&self) -> Option<u32>;
}

impl PendingSet for u128 {
    fn empty(_slots: usize) -> Self {
        0
    }

    fn set(&mut self, slot: u32) {
        *self |= 1u128 << slot;
    }

    fn clear(&mut self, slot: u32) {
        *self &= !(1u128 << slot);
    }

    fn lowest(&self) -> Option<u32> {
        if *self == 0 {
            None
        } else {
            Some(self.trailing_zeros())
        }
    }
}

impl PendingSet for Vec<u64> {
    fn empty(slots: usize) -> Self {
        vec![0; slots / 64 + 1]
    }

    fn set(&mut self, slot: u32) {
        self[slot as usize / 64] |= 1 << (slot % 64);
    }

    fn clear(&mut self, slot: u32) {
        self[slot as usize / 64] &= !(1 << (slot % 64));
    }

    fn lowest(&self) -> Option<u32> {
        for (i, word) in self.iter().enumerate() {
            if *word != 0 {
                return Some(i as u32 * 64 + word.trailing_zeros());
            }
        }
        None
    }
}

struct SatCtx {
    logic: Logic,
    ids: Vec<NodeId>,
    ops: Vec<SatOp>,
}

#[derive(Clone, Copy)]
enum SatOp {
    Atom,
    Neg(u32),
    Box(u32),
    Imp(u32, u32),
}

enum Trail {
    Sign(u32),
    Det(u32),
    Br(u32),
}

struct SatState<B> {
    signs: Vec<u8>,
    order: Vec<u32>,
    det: B,
    br: B,
    trail: Vec<Trail>,
}

enum AddOutcome {
    Ok,
    Contradiction,
}

impl SatCtx {
    fn rule_of(&self, slot: u32, sign: TruthValue) -> &'static PropRule {
        let kind = match self.ops[slot as usize] {
            SatOp::Atom => unreachable!("atoms are never expanded"),
            SatOp::Neg(_) => ConnectiveKind::Neg,
            SatOp::Box(_) => ConnectiveKind::Box,
            SatOp::Imp(..) => ConnectiveKind::Imp,
        };
        prop_rule(self.logic, sign, kind)
    }

    fn child(&self, slot: u32, which: u8) -> u32 {
        match (self.ops[slot as usize], which) {
            (SatOp::Neg(a), _) | (SatOp::Box(a), _) => a,
            (SatOp::Imp(a, _), 0) => a,
            (SatOp::Imp(_, b), _) => b,
            (SatOp::Atom, _) => unreachable!(),
        }
    }

    fn add<B: PendingSet>(&self, st: &mut SatState<B>, sign: TruthValue, slot: u32) -> AddOutcome {
        let cur = st.signs[slot as usize];
        if cur != UNSET {
            return if cur == sign as u8 { AddOutcome::Ok } else { AddOutcome::Contradiction };
        }
        st.signs[slot as usize] = sign as u8;
        st.order.push(slot);
        st.trail.push(Trail::Sign(slot));
        match self.ops[slot as usize] {
            SatOp::Atom => AddOutcome::Ok,
            _ => {
                let rule = self.rule_of(slot, sign);
                match rule.branches.len() {
                    // A sign no table row can produce: the branch is doomed,
                    // close it now rather than at expansion time.
                    0 => AddOutcome::Contradiction,
                    1 => {
                        st.det.set(slot);
                        AddOutcome::Ok
                    }
                    _ => {
                        st.br.set(slot);
                        AddOutcome::Ok
                    }
                }
            }
        }
    }

    fn rollback<B: PendingSet>(&self, st: &mut SatState<B>, checkpoint: usize) {
        while st.trail.len() > checkpoint {
            match st.trail.pop().unwrap() {
                Trail::Sign(slot) => {
                    st.signs[slot as usize] = UNSET;
                    st.order.pop();
                    st.det.clear(slot);
                    st.br.clear(slot);
                }
                Trail::Det(slot) => st.det.set(slot),
                Trail::Br(slot) => st.br.set(slot),
            }
        }
    }

    /// Depth-first saturation. Deterministic single-branch rules are applied
    /// before branching ones; among equals the smallest slot goes first, and
    /// rule alternatives are tried left to right. Returns true when an open
    /// saturated branch was reached (left in `st`).
    fn dfs<B: PendingSet>(&self, st: &mut SatState<B>) -> bool {
        loop {
            if let Some(slot) = st.det.lowest() {
                st.det.clear(slot);
                st.trail.push(Trail::Det(slot));
                let sign = TruthValue::from_index(st.signs[slot as usize]);
                let branch = self.rule_of(slot, sign).branches[0];
                for &(s, which) in branch {
                    if let AddOutcome::Contradiction = self.add(st, s, self.child(slot, which)) {
                        return false;
                    }
                }
                continue;
            }
            if let Some(slot) = st.br.lowest() {
                st.br.clear(slot);
                st.trail.push(Trail::Br(slot));
                let sign = TruthValue::from_index(st.signs[slot as usize]);
                let rule = self.rule_of(slot, sign);
                for alt in rule.branches {
                    let checkpoint = st.trail.len();
                    let mut alive = true;
                    for &(s, which) in *alt {
                        if let AddOutcome::Contradiction = self.add(st, s, self.child(slot, which)) {
                            alive = false;
                            break;
                        }
                    }
                    if alive && self.dfs(st) {
                        return true;
                    }
                    self.rollback(st, checkpoint);
                }
                return false;
            }
            return true;
        }
    }

    fn saturate<B: PendingSet>(&self, sign: TruthValue, root_slot: u32) -> PropSaturation {
        let n = self.ops.len();
        let mut st = SatState {
            signs: vec![UNSET; n],
            order: Vec::with_capacity(n),
            det: B::empty(n),
            br: B::empty(n),
            trail: Vec::with_capacity(4 * n),
        };
        match self.add(&mut st, sign, root_slot) {
            AddOutcome::Contradiction => PropSaturation::Closed,
            AddOutcome::Ok => {
                if self.dfs(&mut st) {
                    let branch = st
                        .order
                        .iter()
                        .map(|&slot| {
                            (
                                TruthValue::from_index(st.signs[slot as usize]),
                                self.ids[slot as usize],
                            )
                        })
                        .collect();
                    PropSaturation::Open(branch)
                } else {
                    PropSaturation::Closed
                }
            }
        }
    }
}

/// Saturates a signed propositional DAG node. Terminates on every input:
/// each rule's consequences are proper subformulas of its premise.
pub fn saturate_prop_dag(
    logic: Logic,
    dag: &PropDag,
    sign: TruthValue,
    root: NodeId,
) -> PropSaturation {
    let ids = dag.closure(&[root]);
    let local = |id: NodeId| ids.binary_search(&id).unwrap() as u32;
    let ops = ids
        .iter()
        .map(|&id| match dag.op(id) {
            PropOp::Atom(_) => SatOp::Atom,
            PropOp::Not(a) => SatOp::Neg(local(a)),
            PropOp::Box(a) => SatOp::Box(local(a)),
            PropOp::Imp(a, b) => SatOp::Imp(local(a), local(b)),
        })
        .collect();
    let root_slot = local(root);
    let wide = ids.len() > 128;
    let ctx = SatCtx { logic, ids, ops };
    if wide {
        ctx.saturate::<Vec<u64>>(sign, root_slot)
    } else {
        ctx.saturate::<u128>(sign, root_slot)
    }
}

/// Fast provability check for a propositional DAG node: closed tableaux from
/// both `F` and `f`.
pub fn prove_prop_dag(logic: Logic, dag: &PropDag, root: NodeId) -> bool {
    matches!(saturate_prop_dag(logic, dag, NecFalse, root), PropSaturation::Closed)
        && matches!(saturate_prop_dag(logic, dag, ConFalse, root), PropSaturation::Closed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropSaturationOutcome {
    Closed,
    /// Signed formulas of the first open saturated branch, in acquisition
    /// order.
    Open(Vec<SignedFormula>),
}

/// Formula-level propositional saturation.
pub fn saturate_prop(
    logic: Logic,
    sign: TruthValue,
    formula: &Formula,
) -> Result<PropSaturationOutcome, NotPropositional> {
    let mut dag = PropDag::new();
    let root = dag.intern(formula)?;
    Ok(match saturate_prop_dag(logic, &dag, sign, root) {
        PropSaturation::Closed => PropSaturationOutcome::Closed,
        PropSaturation::Open(branch) => PropSaturationOutcome::Open(
            branch
                .into_iter()
                .map(|(sign, id)| SignedFormula { sign, sentence: canonicalize(&dag.formula(id)) })
                .collect(),
        ),
    })
}

// ---------------------------------------------------------------------------
// Branch snapshots and the expansion function
//
// The systematic engine applies `expand` per open branch: quantifier rules
// select constants from what the branch has already seen.

/// What an expansion needs to know about the branch it extends.
#[derive(Debug, Clone, Default)]
pub struct BranchSnapshot {
    signs: HashMap<Rc<Canonical>, TruthValue>,
    consts: BTreeSet<String>,
    /// Signature constants, heading the ordered pool; the fresh pool
    /// `_k1, _k2, ...` follows, extended on demand.
    user_consts: Vec<String>,
}

impl BranchSnapshot {
    pub fn new(sig: &Signature) -> BranchSnapshot {
        BranchSnapshot {
            signs: HashMap::new(),
            consts: BTreeSet::new(),
            user_consts: sig.constants().to_vec(),
        }
    }

    pub fn from_entries(entries: &[Entry], sig: &Signature) -> BranchSnapshot {
        let mut snap = BranchSnapshot::new(sig);
        for e in entries {
            snap.observe(e);
        }
        snap
    }

    /// Records an entry. Returns false when the entry contradicts an
    /// existing sign (the branch closes).
    pub fn observe(&mut self, entry: &Entry) -> bool {
        match entry {
            Entry::Signed(sf) => {
                for c in sf.sentence.formula().constants() {
                    self.consts.insert(c);
                }
                match self.signs.get(&sf.sentence) {
                    Some(&sign) if sign != sf.sign => false,
                    Some(_) => true,
                    None => {
                        self.signs.insert(Rc::new(sf.sentence.clone()), sf.sign);
                        true
                    }
                }
            }
            Entry::Marked(m) => {
                self.consts.insert(m.mark.clone());
                true
            }
        }
    }

    pub fn sign_of(&self, sentence: &Canonical) -> Option<TruthValue> {
        self.signs.get(sentence).copied()
    }

    fn pool_name(&self, index: usize) -> String {
        if index < self.user_consts.len() {
            self.user_consts[index].clone()
        } else {
            crate::formula::fresh_constant(index - self.user_consts.len() + 1)
        }
    }

    /// First constant in pool order that has not yet appeared on the branch.
    pub fn first_unseen_constant(&self) -> String {
        for i in 0.. {
            let name = self.pool_name(i);
            if !self.consts.contains(&name) {
                return name;
            }
        }
        unreachable!()
    }

    /// First constant in pool order satisfying `accept`, skipping `exclude`.
    pub fn first_constant_such_that(
        &self,
        exclude: Option<&str>,
        mut accept: impl FnMut(&str) -> bool,
    ) -> String {
        for i in 0.. {
            let name = self.pool_name(i);
            if Some(name.as_str()) == exclude {
                continue;
            }
            if accept(&name) {
                return name;
            }
        }
        unreachable!()
    }
}

/// Result of applying the unique matching rule to an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expansion {
    /// The rule opens these branch extensions (left to right).
    Extensions { rule: &'static str, branches: Vec<Vec<Entry>> },
    /// No table row can produce this sign: the branch closes.
    Closes { rule: &'static str },
    /// Atomic signed formulas have no rule.
    Atomic,
}

fn instance(var: &str, body: &Formula, constant: &str) -> Canonical {
    let inst = substitute(body, var, &Term::Const(constant.to_string()))
        .expect("constants are always free for any variable");
    canonicalize(&inst)
}

/// Applies the single matching tableau rule to `entry` in the context of a
/// branch. Quantifier rules follow the systematic procedure: the provisos
/// fix which constants may be picked, and the reusable rules re-emit their
/// own reusable copy so they can fire again later.
pub fn expand(logic: Logic, entry: &Entry, branch: &BranchSnapshot) -> Expansion {
    match entry {
        Entry::Signed(sf) => expand_signed(logic, sf, branch),
        Entry::Marked(m) => expand_marked(m, branch),
    }
}

fn expand_signed(logic: Logic, sf: &SignedFormula, branch: &BranchSnapshot) -> Expansion {
    let sign = sf.sign;
    match sf.sentence.formula() {
        Formula::Prop(_) | Formula::Pred(..) => Expansion::Atomic,
        Formula::Not(a) => propositional_expansion(logic, sign, ConnectiveKind::Neg, &[a]),
        Formula::Box(a) => propositional_expansion(logic, sign, ConnectiveKind::Box, &[a]),
        Formula::Imp(a, b) => propositional_expansion(logic, sign, ConnectiveKind::Imp, &[a, b]),
        Formula::All(x, body) => match sign {
            NecFalse => {
                // used once per branch, with a fresh constant
                let c = branch.first_unseen_constant();
                Expansion::Extensions {
                    rule: "F:forall",
                    branches: vec![vec![Entry::Signed(SignedFormula {
                        sign: NecFalse,
                        sentence: instance(x, body, &c),
                    })]],
                }
            }
            NecTrue => {
                // reusable: instantiates the first constant whose T-instance
                // is missing and re-emits itself
                let c = branch.first_constant_such_that(None, |c| {
                    branch.sign_of(&instance(x, body, c)) != Some(NecTrue)
                });
                Expansion::Extensions {
                    rule: "T:forall",
                    branches: vec![vec![
                        Entry::Signed(SignedFormula {
                            sign: NecTrue,
                            sentence: instance(x, body, &c),
                        }),
                        Entry::Signed(SignedFormula {
                            sign: NecTrue,
                            sentence: sf.sentence.clone(),
                        }),
                    ]],
                }
            }
            ConTrue | ConFalse => {
                // first use takes a fresh constant and leaves a marked copy
                // behind for reuse
                let c = branch.first_unseen_constant();
                let rule = if sign == ConTrue { "t:forall" } else { "f:forall" };
                Expansion::Extensions {
                    rule,
                    branches: vec![vec![
                        Entry::Signed(SignedFormula { sign, sentence: instance(x, body, &c) }),
                        Entry::Marked(MarkedSignedFormula {
                            sign,
                            sentence: sf.sentence.clone(),
                            mark: c,
                        }),
                    ]],
                }
            }
        },
    }
}

fn propositional_expansion(
    logic: Logic,
    sign: TruthValue,
    kind: ConnectiveKind,
    children: &[&Formula],
) -> Expansion {
    let rule = prop_rule(logic, sign, kind);
    if rule.branches.is_empty() {
        return Expansion::Closes { rule: rule.name };
    }
    let canon: Vec<Canonical> = children.iter().map(|f| canonicalize(f)).collect();
    let branches = rule
        .branches
        .iter()
        .map(|alt| {
            alt.iter()
                .map(|&(s, which)| {
                    Entry::Signed(SignedFormula { sign: s, sentence: canon[which as usize].clone() })
                })
                .collect()
        })
        .collect();
    Expansion::Extensions { rule: rule.name, branches }
}

fn expand_marked(m: &MarkedSignedFormula, branch: &BranchSnapshot) -> Expansion {
    let (x, body) = match m.sentence.formula() {
        Formula::All(x, body) => (x.as_str(), body.as_ref()),
        other => unreachable!("marked entry over non-universal sentence {other}"),
    };
    let arm = |wanted: TruthValue| {
        let c = branch.first_constant_such_that(Some(&m.mark), |c| {
            branch.sign_of(&instance(x, body, c)) != Some(wanted)
        });
        vec![
            Entry::Signed(SignedFormula { sign: wanted, sentence: instance(x, body, &c) }),
            Entry::Marked(m.clone()),
        ]
    };
    match m.sign {
        ConTrue => {
            Expansion::Extensions { rule: "t:forall*", branches: vec![arm(ConTrue), arm(NecTrue)] }
        }
        ConFalse => Expansion::Extensions {
            rule: "f:forall*",
            branches: vec![arm(ConFalse), arm(NecTrue), arm(ConTrue)],
        },
        other => unreachable!("marked entry with sign {other}"),
    }
}

// ---------------------------------------------------------------------------
// The systematic first-order procedure

/// A root-to-leaf branch of a tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub entries: Vec<Entry>,
}

impl Branch {
    /// The signed formulas on the branch; marked entries are dropped (their
    /// signed part appeared unmarked earlier on the same branch).
    pub fn signed_formulas(&self) -> Vec<SignedFormula> {
        self.entries.iter().filter_map(|e| e.as_signed().cloned()).collect()
    }

    /// Constants appearing on the branch, sorted.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.entries {
            match e {
                Entry::Signed(sf) => out.extend(sf.sentence.formula().constants()),
                Entry::Marked(m) => {
                    out.insert(m.mark.clone());
                }
            }
        }
        out
    }
}

/// One node of a rendered tableau tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub entry: Entry,
    /// Name of the rule applied to this node, once it has been used.
    pub rule: Option<&'static str>,
    pub children: Vec<ProofNode>,
    /// True on the last node of a closed branch.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableauOutcome {
    Closed,
    /// The tableau is finished and this branch stays open.
    OpenFinished(Branch),
    /// The stage budget ran out; the first open branch is returned.
    Exhausted(Branch),
}

#[derive(Debug, Clone)]
pub struct SystematicRun {
    pub outcome: TableauOutcome,
    pub tree: ProofNode,
    pub stages: usize,
}

struct TreeNode {
    entry: Entry,
    parent: Option<usize>,
    children: Vec<usize>,
    used: bool,
    rule: Option<&'static str>,
    closed_tip: bool,
}

struct Leaf {
    node: usize,
    closed: bool,
    snapshot: BranchSnapshot,
}

struct Engine {
    logic: Logic,
    nodes: Vec<TreeNode>,
    leaves: Vec<Leaf>,
    /// Once-only expressions, oldest first.
    queue: VecDeque<usize>,
    /// Reusable expressions (T-signed universals and marked formulas); these
    /// regenerate on every use, so they run only when no once-only work is
    /// left. Every occurrence still fires eventually: each reuse spawns a
    /// finite once-only burst, after which control returns here.
    reuse_queue: VecDeque<usize>,
    stages: usize,
}

fn entry_expandable(entry: &Entry) -> bool {
    match entry {
        Entry::Signed(sf) => !sf.sentence.formula().is_atomic(),
        Entry::Marked(_) => true,
    }
}

fn entry_reusable(entry: &Entry) -> bool {
    match entry {
        Entry::Signed(sf) => {
            sf.sign == NecTrue && matches!(sf.sentence.formula(), Formula::All(..))
        }
        Entry::Marked(_) => true,
    }
}

impl Engine {
    fn new(logic: Logic, root: Entry, sig: &Signature) -> Engine {
        let mut snapshot = BranchSnapshot::new(sig);
        let alive = snapshot.observe(&root);
        debug_assert!(alive);
        let mut queue = VecDeque::new();
        let mut reuse_queue = VecDeque::new();
        if entry_expandable(&root) {
            if entry_reusable(&root) {
                reuse_queue.push_back(0);
            } else {
                queue.push_back(0);
            }
        }
        Engine {
            logic,
            nodes: vec![TreeNode {
                entry: root,
                parent: None,
                children: Vec::new(),
                used: false,
                rule: None,
                closed_tip: false,
            }],
            leaves: vec![Leaf { node: 0, closed: false, snapshot }],
            queue,
            reuse_queue,
            stages: 0,
        }
    }

    fn is_ancestor(&self, ancestor: usize, mut node: usize) -> bool {
        loop {
            if node == ancestor {
                return true;
            }
            match self.nodes[node].parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    fn push_node(&mut self, parent: usize, entry: Entry) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            entry,
            parent: Some(parent),
            children: Vec::new(),
            used: false,
            rule: None,
            closed_tip: false,
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Appends a chain of entries under a leaf node, updating the snapshot.
    /// Once a contradiction appears the branch is closed and not extended
    /// further.
    fn append_chain(
        &mut self,
        leaf_node: usize,
        snapshot: &mut BranchSnapshot,
        entries: &[Entry],
    ) -> (usize, bool) {
        let mut tip = leaf_node;
        for entry in entries {
            let alive = snapshot.observe(entry);
            tip = self.push_node(tip, entry.clone());
            if entry_expandable(entry) {
                if entry_reusable(entry) {
                    self.reuse_queue.push_back(tip);
                } else {
                    self.queue.push_back(tip);
                }
            }
            if !alive {
                self.nodes[tip].closed_tip = true;
                return (tip, true);
            }
        }
        (tip, false)
    }

    /// Next usable occurrence: oldest once-only expression on an open
    /// branch, else the oldest reusable one. Occurrences surviving only on
    /// closed branches are discarded.
    fn next_occurrence(&mut self) -> Option<usize> {
        loop {
            let from_reuse = self.queue.is_empty();
            let node = if from_reuse { self.reuse_queue.pop_front() } else { self.queue.pop_front() }?;
            let touches_open =
                self.leaves.iter().any(|l| !l.closed && self.is_ancestor(node, l.node));
            if touches_open {
                return Some(node);
            }
            self.nodes[node].used = true;
        }
    }

    fn run(&mut self, budget: usize) -> TableauOutcome {
        loop {
            if self.leaves.iter().all(|l| l.closed) {
                return TableauOutcome::Closed;
            }
            let node = match self.next_occurrence() {
                Some(n) => n,
                None => {
                    let open = self.leaves.iter().find(|l| !l.closed).unwrap();
                    return TableauOutcome::OpenFinished(self.branch_of(open.node));
                }
            };
            if self.stages >= budget {
                if entry_reusable(&self.nodes[node].entry) {
                    self.reuse_queue.push_front(node);
                } else {
                    self.queue.push_front(node);
                }
                let open = self.leaves.iter().find(|l| !l.closed).unwrap();
                return TableauOutcome::Exhausted(self.branch_of(open.node));
            }
            self.stages += 1;
            self.nodes[node].used = true;
            let entry = self.nodes[node].entry.clone();
            // identify leaves by their tree node: extending one leaf inserts
            // siblings and shifts positions in `self.leaves`
            let leaf_nodes: Vec<usize> = self
                .leaves
                .iter()
                .filter(|l| !l.closed && self.is_ancestor(node, l.node))
                .map(|l| l.node)
                .collect();
            for leaf_node_id in leaf_nodes {
                let leaf_id =
                    self.leaves.iter().position(|l| l.node == leaf_node_id).unwrap();
                let expansion = expand(self.logic, &entry, &self.leaves[leaf_id].snapshot);
                match expansion {
                    Expansion::Atomic => unreachable!("atomic entries are never enqueued"),
                    Expansion::Closes { rule } => {
                        self.nodes[node].rule = Some(rule);
                        let tip = self.leaves[leaf_id].node;
                        self.nodes[tip].closed_tip = true;
                        self.leaves[leaf_id].closed = true;
                    }
                    Expansion::Extensions { rule, branches } => {
                        self.nodes[node].rule = Some(rule);
                        let leaf_node = self.leaves[leaf_id].node;
                        let base_snapshot = self.leaves[leaf_id].snapshot.clone();
                        let mut replacements: Vec<Leaf> = Vec::with_capacity(branches.len());
                        for alt in &branches {
                            let mut snapshot = base_snapshot.clone();
                            let (tip, closed) = self.append_chain(leaf_node, &mut snapshot, alt);
                            replacements.push(Leaf { node: tip, closed, snapshot });
                        }
                        // replace the leaf in place, keeping left-to-right order
                        let rest = replacements.split_off(1);
                        self.leaves[leaf_id] = replacements.pop().unwrap();
                        let mut at = leaf_id + 1;
                        for leaf in rest {
                            self.leaves.insert(at, leaf);
                            at += 1;
                        }
                    }
                }
            }
        }
    }

    fn branch_of(&self, leaf: usize) -> Branch {
        let mut path = Vec::new();
        let mut cur = Some(leaf);
        while let Some(n) = cur {
            path.push(self.nodes[n].entry.clone());
            cur = self.nodes[n].parent;
        }
        path.reverse();
        Branch { entries: path }
    }

    fn render(&self, node: usize) -> ProofNode {
        ProofNode {
            entry: self.nodes[node].entry.clone(),
            rule: self.nodes[node].rule,
            children: self.nodes[node].children.iter().map(|&c| self.render(c)).collect(),
            closed: self.nodes[node].closed_tip,
        }
    }
}

/// Runs the systematic tableau procedure for `sign:formula`.
///
/// Each stage uses one occurrence: the oldest unused once-only expression
/// lying on an open branch (else the oldest reusable one) is expanded on
/// every open branch containing it. The procedure stops on closure, when no
/// unused expression remains on an open branch (finished), or when `budget`
/// stages have been spent.
pub fn run_systematic(
    logic: Logic,
    sign: TruthValue,
    formula: &Formula,
    sig: &Signature,
    budget: usize,
) -> SystematicRun {
    assert!(formula.is_sentence(), "tableaux are defined on sentences");
    let root = Entry::signed(sign, formula);
    let mut engine = Engine::new(logic, root, sig);
    let outcome = engine.run(budget);
    SystematicRun { outcome, tree: engine.render(0), stages: engine.stages }
}

// ---------------------------------------------------------------------------
// Provability

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofVerdict {
    Proved,
    NotProved,
    BudgetExhausted,
}

impl fmt::Display for ProofVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofVerdict::Proved => "proved",
            ProofVerdict::NotProved => "not proved",
            ProofVerdict::BudgetExhausted => "budget exhausted",
        })
    }
}

/// Outcome of the two refutation searches, roots `F:psi` and `f:psi`.
#[derive(Debug, Clone)]
pub struct ProveOutcome {
    pub verdict: ProofVerdict,
    /// The goal after premise nesting and universal closure.
    pub goal: Formula,
    /// Run for the root `F:goal`.
    pub run_nec_false: SystematicRun,
    /// Run for the root `f:goal`.
    pub run_con_false: SystematicRun,
}

impl ProveOutcome {
    /// An open finished branch witnessing failure, if any.
    pub fn open_branch(&self) -> Option<&Branch> {
        for run in [&self.run_nec_false, &self.run_con_false] {
            if let TableauOutcome::OpenFinished(b) = &run.outcome {
                return Some(b);
            }
        }
        None
    }
}

/// Tableau provability of `formula` (free variables are universally closed
/// first). Propositional inputs terminate regardless of the budget; for
/// first-order inputs `budget` bounds the stages of each of the two runs.
pub fn prove(logic: Logic, formula: &Formula, sig: &Signature, budget: usize) -> ProveOutcome {
    prove_from(logic, &[], formula, sig, budget)
}

/// Provability from finitely many premises: the premises are nested into a
/// right-associated implication in the given order and the result is proved.
pub fn prove_from(
    logic: Logic,
    premises: &[Formula],
    formula: &Formula,
    sig: &Signature,
    budget: usize,
) -> ProveOutcome {
    let mut goal = formula.clone();
    for premise in premises.iter().rev() {
        goal = Formula::imp(premise.clone(), goal);
    }
    let goal = universal_closure(&goal);
    let effective_budget = if goal.is_propositional() { usize::MAX } else { budget };
    let run_nec_false = run_systematic(logic, NecFalse, &goal, sig, effective_budget);
    let run_con_false = run_systematic(logic, ConFalse, &goal, sig, effective_budget);
    let closed = |run: &SystematicRun| matches!(run.outcome, TableauOutcome::Closed);
    let open = |run: &SystematicRun| matches!(run.outcome, TableauOutcome::OpenFinished(_));
    let verdict = if closed(&run_nec_false) && closed(&run_con_false) {
        ProofVerdict::Proved
    } else if open(&run_nec_false) || open(&run_con_false) {
        ProofVerdict::NotProved
    } else {
        ProofVerdict::BudgetExhausted
    };
    ProveOutcome { verdict, goal, run_nec_false, run_con_false }
}


#[cfg(test)]
mod wide_closure_tests {
    use super::*;
    use crate::propdag::PropDag;

    /// Saturation falls back to the vector-backed pending sets above 128
    /// distinct subformulas.
    #[test]
    fn saturation_handles_wide_closures() {
        let mut dag = PropDag::new();
        // right-nested implication chain over 80 distinct atoms: the F:->
        // rule unwinds it deterministically into one open branch
        let mut chain = dag.atom("a79");
        for i in (0..79).rev() {
            let name = format!("a{i}");
            let atom = dag.atom(&name);
            chain = dag.imp(atom, chain);
        }
        assert!(dag.closure(&[chain]).len() > 128);
        match saturate_prop_dag(Logic::Tm, &dag, NecFalse, chain) {
            PropSaturation::Open(branch) => {
                assert!(branch.len() > 128);
            }
            PropSaturation::Closed => panic!("distinct atoms cannot close"),
        }
    }
}
