//! A shared subformula DAG for propositional formulas.
//!
//! Valuations are functions on formulas, so two occurrences of the same
//! subformula must receive one value. Interning formulas into a DAG makes
//! that sharing structural: every distinct subformula appears exactly once,
//! and a node's children always have smaller ids, so ascending id order is a
//! topological order. Both the brute-force oracle and the propositional
//! tableau saturation work on these node ids.

use crate::formula::Formula;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropOp {
    Atom(u32),
    Not(NodeId),
    Box(NodeId),
    Imp(NodeId, NodeId),
}

const TAG_ATOM: u8 = 0;
const TAG_NOT: u8 = 1;
const TAG_BOX: u8 = 2;
const TAG_IMP: u8 = 3;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct RawNode {
    tag: u8,
    a: u32,
    b: u32,
}

#[derive(Default)]
pub struct PropDag {
    nodes: Vec<RawNode>,
    atom_names: Vec<String>,
    atom_index: HashMap<String, u32>,
    index: HashMap<RawNode, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotPropositional;

impl std::fmt::Display for NotPropositional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("formula contains first-order constructs")
    }
}

impl std::error::Error for NotPropositional {}

impl PropDag {
    pub fn new() -> PropDag {
        PropDag::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn op(&self, id: NodeId) -> PropOp {
        let n = self.nodes[id.index()];
        match n.tag {
            TAG_ATOM => PropOp::Atom(n.a),
            TAG_NOT => PropOp::Not(NodeId(n.a)),
            TAG_BOX => PropOp::Box(NodeId(n.a)),
            TAG_IMP => PropOp::Imp(NodeId(n.a), NodeId(n.b)),
            _ => unreachable!(),
        }
    }

    pub fn is_atom(&self, id: NodeId) -> bool {
        self.nodes[id.index()].tag == TAG_ATOM
    }

    pub fn atom_name(&self, atom: u32) -> &str {
        &self.atom_names[atom as usize]
    }

    fn push(&mut self, raw: RawNode) -> NodeId {
        if let Some(&id) = self.index.get(&raw) {
            return NodeId(id);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(raw);
        self.index.insert(raw, id);
        NodeId(id)
    }

    /// Pushes a node known to be absent. Used by the exhaustive enumerator,
    /// which constructs every formula exactly once and would otherwise pay
    /// for a multi-million-entry hash map.
    fn push_unchecked(&mut self, raw: RawNode) -> NodeId {
        let id = self.nodes.len() as u32;
        self.nodes.push(raw);
        NodeId(id)
    }

    pub fn atom(&mut self, name: &str) -> NodeId {
        if let Some(&idx) = self.atom_index.get(name) {
            return self.push(RawNode { tag: TAG_ATOM, a: idx, b: 0 });
        }
        let idx = self.atom_names.len() as u32;
        self.atom_names.push(name.to_string());
        self.atom_index.insert(name.to_string(), idx);
        self.push(RawNode { tag: TAG_ATOM, a: idx, b: 0 })
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        self.push(RawNode { tag: TAG_NOT, a: a.0, b: 0 })
    }

    pub fn boxed(&mut self, a: NodeId) -> NodeId {
        self.push(RawNode { tag: TAG_BOX, a: a.0, b: 0 })
    }

    pub fn imp(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(RawNode { tag: TAG_IMP, a: a.0, b: b.0 })
    }

    /// Interns a propositional formula, sharing equal subtrees.
    pub fn intern(&mut self, f: &Formula) -> Result<NodeId, NotPropositional> {
        match f {
            Formula::Prop(p) => Ok(self.atom(p)),
            Formula::Not(a) => {
                let a = self.intern(a)?;
                Ok(self.not(a))
            }
            Formula::Box(a) => {
                let a = self.intern(a)?;
                Ok(self.boxed(a))
            }
            Formula::Imp(a, b) => {
                let a = self.intern(a)?;
                let b = self.intern(b)?;
                Ok(self.imp(a, b))
            }
            Formula::Pred(..) | Formula::All(..) => Err(NotPropositional),
        }
    }

    /// Reconstructs the formula tree of a node.
    pub fn formula(&self, id: NodeId) -> Formula {
        match self.op(id) {
            PropOp::Atom(a) => Formula::prop(self.atom_name(a)),
            PropOp::Not(a) => Formula::not(self.formula(a)),
            PropOp::Box(a) => Formula::boxed(self.formula(a)),
            PropOp::Imp(a, b) => Formula::imp(self.formula(a), self.formula(b)),
        }
    }

    pub fn render(&self, id: NodeId) -> String {
        self.formula(id).to_string()
    }

    /// The subformula closure of the given roots, as ascending node ids
    /// (children before parents).
    pub fn closure(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen: Vec<NodeId> = Vec::with_capacity(16);
        let mut stack: Vec<NodeId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if seen.contains(&id) {
                continue;
            }
            seen.push(id);
            match self.op(id) {
                PropOp::Atom(_) => {}
                PropOp::Not(a) | PropOp::Box(a) => stack.push(a),
                PropOp::Imp(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        seen.sort_unstable();
        seen
    }

    /// Number of connective nodes below (and including) `id`, counting each
    /// distinct subformula once per occurrence in the tree reading.
    pub fn tree_connectives(&self, id: NodeId) -> usize {
        match self.op(id) {
            PropOp::Atom(_) => 0,
            PropOp::Not(a) | PropOp::Box(a) => 1 + self.tree_connectives(a),
            PropOp::Imp(a, b) => 1 + self.tree_connectives(a) + self.tree_connectives(b),
        }
    }

    /// Enumerates every propositional formula over the first `natoms` atom
    /// names with exactly 0..=max_connectives connective nodes. Returns one
    /// id list per size. Each distinct formula is constructed exactly once.
    pub fn enumerate_up_to(&mut self, max_connectives: usize, natoms: usize) -> Vec<Vec<NodeId>> {
        let mut levels: Vec<Vec<NodeId>> = Vec::with_capacity(max_connectives + 1);
        let base: Vec<NodeId> = (0..natoms).map(|i| self.atom(ATOM_NAMES[i])).collect();
        levels.push(base);
        for n in 1..=max_connectives {
            let mut level = Vec::new();
            for i in 0..levels[n - 1].len() {
                let a = levels[n - 1][i];
                level.push(self.push_unchecked(RawNode { tag: TAG_NOT, a: a.0, b: 0 }));
                level.push(self.push_unchecked(RawNode { tag: TAG_BOX, a: a.0, b: 0 }));
            }
            for i in 0..n {
                let j = n - 1 - i;
                for ai in 0..levels[i].len() {
                    for bj in 0..levels[j].len() {
                        let a = levels[i][ai];
                        let b = levels[j][bj];
                        level.push(self.push_unchecked(RawNode { tag: TAG_IMP, a: a.0, b: b.0 }));
                    }
                }
            }
            levels.push(level);
        }
        levels
    }
}

/// Atom names used by the enumerator and the random generator.
pub const ATOM_NAMES: [&str; 8] = ["p", "q", "r", "s", "u", "v", "w", "z"];

/// SplitMix64: a small fixed-step generator, hand-rolled so that seeded runs
/// are byte-identical across builds and platforms.
#[derive(Debug, Clone, Copy)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Builds a random formula with exactly `connectives` connective nodes over
/// the first `natoms` atoms.
pub fn random_formula(
    dag: &mut PropDag,
    rng: &mut SplitMix64,
    connectives: usize,
    natoms: usize,
) -> NodeId {
    assert!(natoms >= 1 && natoms <= ATOM_NAMES.len());
    if connectives == 0 {
        let i = rng.below(natoms as u64) as usize;
        return dag.atom(ATOM_NAMES[i]);
    }
    match rng.below(3) {
        0 => {
            let a = random_formula(dag, rng, connectives - 1, natoms);
            dag.not(a)
        }
        1 => {
            let a = random_formula(dag, rng, connectives - 1, natoms);
            dag.boxed(a)
        }
        _ => {
            let left = rng.below(connectives as u64) as usize;
            let a = random_formula(dag, rng, left, natoms);
            let b = random_formula(dag, rng, connectives - 1 - left, natoms);
            dag.imp(a, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::formula::Signature;

    #[test]
    fn interning_shares_subformulas() {
        let mut dag = PropDag::new();
        let f = parse("(p -> q) -> (p -> q)", &Signature::new()).unwrap();
        let root = dag.intern(&f).unwrap();
        // p, q, p -> q, (p -> q) -> (p -> q)
        assert_eq!(dag.closure(&[root]).len(), 4);
        assert_eq!(dag.render(root), "(p -> q) -> p -> q");
        assert_eq!(dag.formula(root), f);
    }

    #[test]
    fn closure_is_topological() {
        let mut dag = PropDag::new();
        let f = parse("[]~p -> (p -> []p)", &Signature::new()).unwrap();
        let root = dag.intern(&f).unwrap();
        let closure = dag.closure(&[root]);
        for &id in &closure {
            match dag.op(id) {
                PropOp::Atom(_) => {}
                PropOp::Not(a) | PropOp::Box(a) => assert!(a < id),
                PropOp::Imp(a, b) => assert!(a < id && b < id),
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        // a(0) = 2; a(n) = 2 a(n-1) + sum_{i+j=n-1} a(i) a(j)
        let mut dag = PropDag::new();
        let levels = dag.enumerate_up_to(4, 2);
        let sizes: Vec<usize> = levels.iter().map(|l| l.len()).collect();
        assert_eq!(sizes, vec![2, 8, 48, 352, 2880]);
        assert_eq!(dag.len(), 2 + 8 + 48 + 352 + 2880);
        // every enumerated formula has the advertised connective count
        for (n, level) in levels.iter().enumerate().take(3) {
            for &id in level {
                assert_eq!(dag.tree_connectives(id), n);
            }
        }
    }

    #[test]
    fn random_generation_is_deterministic() {
        let mut dag1 = PropDag::new();
        let mut rng1 = SplitMix64::new(42);
        let ids1: Vec<String> = (0..50)
            .map(|_| {
                let id = random_formula(&mut dag1, &mut rng1, 6, 2);
                dag1.render(id)
            })
            .collect();
        let mut dag2 = PropDag::new();
        let mut rng2 = SplitMix64::new(42);
        let ids2: Vec<String> = (0..50)
            .map(|_| {
                let id = random_formula(&mut dag2, &mut rng2, 6, 2);
                dag2.render(id)
            })
            .collect();
        assert_eq!(ids1, ids2);
    }
}
