//! The four truth values, the designated set, and the multioperator tables
//! of the non-deterministic matrices for Tm, S4m and S5m, together with the
//! deterministic quantifier multioperators of the starred systems.
//!
//! All tables are stored as exhaustive lookup data transcribed once; the test
//! module re-states every entry independently so that a transcription slip in
//! either place fails loudly.

use std::fmt;
use std::str::FromStr;

/// One of the four truth values.
///
/// `T` necessarily true, `t` contingently true, `f` contingently false,
/// `F` necessarily false (impossible). The discriminant doubles as the
/// table index, in the fixed enumeration order `T, t, f, F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum TruthValue {
    NecTrue = 0,
    ConTrue = 1,
    ConFalse = 2,
    NecFalse = 3,
}

pub use TruthValue::{ConFalse, ConTrue, NecFalse, NecTrue};

impl TruthValue {
    /// All four values in enumeration order `T, t, f, F`.
    pub const ALL: [TruthValue; 4] = [NecTrue, ConTrue, ConFalse, NecFalse];

    pub fn from_index(i: u8) -> TruthValue {
        Self::ALL[i as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Single-letter label as used in signed formulas: `T`, `t`, `f`, `F`.
    pub fn label(self) -> &'static str {
        match self {
            NecTrue => "T",
            ConTrue => "t",
            ConFalse => "f",
            NecFalse => "F",
        }
    }

    /// True iff the value is designated, i.e. lies in D = {T, t}.
    pub fn is_designated(self) -> bool {
        matches!(self, NecTrue | ConTrue)
    }

    /// Position in the chain F <= f <= t <= T (0 = F).
    pub fn chain_rank(self) -> u8 {
        3 - self as u8
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TruthValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T" => Ok(NecTrue),
            "t" => Ok(ConTrue),
            "f" => Ok(ConFalse),
            "F" => Ok(NecFalse),
            other => Err(format!("unknown truth value {other:?} (expected T, t, f or F)")),
        }
    }
}

/// A non-empty subset of the four truth values, as a 4-bit mask.
///
/// Multioperators of an Nmatrix map into the non-empty subsets, so the
/// constructors here never produce the empty mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValueSet(u8);

impl ValueSet {
    pub const DESIGNATED: ValueSet = ValueSet(0b0011);
    pub const NON_DESIGNATED: ValueSet = ValueSet(0b1100);
    pub const ALL: ValueSet = ValueSet(0b1111);

    pub const fn singleton(v: TruthValue) -> ValueSet {
        ValueSet(1 << v as u8)
    }

    pub const fn pair(a: TruthValue, b: TruthValue) -> ValueSet {
        ValueSet((1 << a as u8) | (1 << b as u8))
    }

    pub fn from_values(vs: &[TruthValue]) -> ValueSet {
        assert!(!vs.is_empty(), "value set may not be empty");
        ValueSet(vs.iter().fold(0, |m, v| m | (1 << *v as u8)))
    }

    /// Reconstructs a set from a raw mask; panics on the empty mask.
    pub fn from_mask(mask: u8) -> ValueSet {
        assert!(mask != 0 && mask & !0b1111 == 0, "invalid value-set mask {mask:#06b}");
        ValueSet(mask)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, v: TruthValue) -> bool {
        self.0 & (1 << v as u8) != 0
    }

    pub fn is_subset_of(self, other: ValueSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Members in enumeration order `T, t, f, F`.
    pub fn iter(self) -> impl Iterator<Item = TruthValue> {
        TruthValue::ALL.into_iter().filter(move |v| self.contains(*v))
    }

    /// All 15 non-empty subsets, in ascending mask order.
    pub fn all_non_empty() -> impl Iterator<Item = ValueSet> {
        (1u8..16).map(ValueSet)
    }

    /// The set obtained by negating every member pointwise.
    pub fn negated(self) -> ValueSet {
        ValueSet(self.iter().fold(0, |m, v| m | neg_op(v).0))
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Identifies one of the three propositional logics. The starred first-order
/// extension is a property of the formula/procedure, not of the matrix: the
/// tables are shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    Tm,
    S4m,
    S5m,
}

impl Logic {
    pub const ALL: [Logic; 3] = [Logic::Tm, Logic::S4m, Logic::S5m];

    pub fn name(self) -> &'static str {
        match self {
            Logic::Tm => "tm",
            Logic::S4m => "s4m",
            Logic::S5m => "s5m",
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Logic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tm" => Ok(Logic::Tm),
            "s4m" => Ok(Logic::S4m),
            "s5m" => Ok(Logic::S5m),
            other => Err(format!("unknown logic {other:?} (expected tm, s4m or s5m)")),
        }
    }
}

const T_: u8 = 1 << 0;
const CT: u8 = 1 << 1;
const CF: u8 = 1 << 2;
const F_: u8 = 1 << 3;

/// Negation table: T -> {F}, t -> {f}, f -> {t}, F -> {T}.
const NEG: [u8; 4] = [F_, CF, CT, T_];

/// Implication table, rows indexed by antecedent, columns by consequent,
/// both in order T, t, f, F.
const IMP: [[u8; 4]; 4] = [
    [T_, CT, CF, F_],
    [T_, T_ | CT, CF, CF],
    [T_, T_ | CT, T_ | CT, CT],
    [T_, T_, T_, T_],
];

/// Box tables for Tm, S4m, S5m, rows in value order T, t, f, F.
const BOX_TM: [u8; 4] = [T_ | CT, CF | F_, CF | F_, CF | F_];
const BOX_S4M: [u8; 4] = [T_, CF | F_, CF | F_, CF | F_];
const BOX_S5M: [u8; 4] = [T_, F_, F_, F_];

/// Universal-quantifier table indexed by the 4-bit mask of the input set.
/// Each output is the meet of the set in the chain F <= f <= t <= T, with
/// index 0 unused (the input set is never empty).
const FORALL: [TruthValue; 16] = {
    let mut table = [NecTrue; 16];
    let mut mask = 1usize;
    while mask < 16 {
        table[mask] = if mask & F_ as usize != 0 {
            NecFalse
        } else if mask & CF as usize != 0 {
            ConFalse
        } else if mask & CT as usize != 0 {
            ConTrue
        } else {
            NecTrue
        };
        mask += 1;
    }
    table
};

/// Existential-quantifier table: the join of the set in the same chain.
const EXISTS: [TruthValue; 16] = {
    let mut table = [NecTrue; 16];
    let mut mask = 1usize;
    while mask < 16 {
        table[mask] = if mask & T_ as usize != 0 {
            NecTrue
        } else if mask & CT as usize != 0 {
            ConTrue
        } else if mask & CF as usize != 0 {
            ConFalse
        } else {
            NecFalse
        };
        mask += 1;
    }
    table
};

/// The (deterministic, singleton-valued) negation multioperator.
pub fn neg_op(v: TruthValue) -> ValueSet {
    ValueSet(NEG[v.index()])
}

/// The unique member of the negation of `v`.
pub fn neg_value(v: TruthValue) -> TruthValue {
    match v {
        NecTrue => NecFalse,
        ConTrue => ConFalse,
        ConFalse => ConTrue,
        NecFalse => NecTrue,
    }
}

/// The implication multioperator.
pub fn imp_op(antecedent: TruthValue, consequent: TruthValue) -> ValueSet {
    ValueSet(IMP[antecedent.index()][consequent.index()])
}

/// The box multioperator of the given logic.
pub fn box_op(logic: Logic, v: TruthValue) -> ValueSet {
    let table = match logic {
        Logic::Tm => &BOX_TM,
        Logic::S4m => &BOX_S4M,
        Logic::S5m => &BOX_S5M,
    };
    ValueSet(table[v.index()])
}

/// The deterministic universal-quantifier multioperator: the meet of the
/// input set in the chain F <= f <= t <= T.
pub fn forall_op(set: ValueSet) -> TruthValue {
    FORALL[set.mask() as usize]
}

/// The deterministic existential-quantifier multioperator: the join of the
/// input set in the chain F <= f <= t <= T.
pub fn exists_op(set: ValueSet) -> TruthValue {
    EXISTS[set.mask() as usize]
}

pub fn is_designated(v: TruthValue) -> bool {
    v.is_designated()
}
