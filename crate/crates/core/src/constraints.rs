//! Range-set constraints on symbols.
//!
//! A [`RangeSet`] is a sorted list of disjoint, non-adjacent closed intervals.
//! All algebra is parameterized over a [`Universe`] so that it can be checked
//! exhaustively against bit sets on a tiny integer type; analyses use
//! [`Universe::I64`].

use std::collections::BTreeMap;
use std::fmt;

use crate::frontend::BinOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    pub min: i64,
    pub max: i64,
}

impl Universe {
    pub const I64: Universe = Universe {
        min: i64::MIN,
        max: i64::MAX,
    };

    /// Signed `bits`-bit integers, e.g. `bits(5)` is [-16, 15].
    pub fn bits(bits: u32) -> Universe {
        assert!((1..=64).contains(&bits));
        if bits == 64 {
            return Universe::I64;
        }
        let half = 1i64 << (bits - 1);
        Universe {
            min: -half,
            max: half - 1,
        }
    }

    fn size(self) -> i128 {
        self.max as i128 - self.min as i128 + 1
    }

    /// Maps any integer into the universe modulo its size.
    fn wrap(self, v: i128) -> i64 {
        (((v - self.min as i128).rem_euclid(self.size())) + self.min as i128) as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RangeSet {
    ranges: Vec<(i64, i64)>,
}

impl RangeSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self::full_in(Universe::I64)
    }

    pub fn full_in(u: Universe) -> Self {
        Self::interval(u.min, u.max)
    }

    pub fn single(v: i64) -> Self {
        Self::interval(v, v)
    }

    /// `[lo, hi]`, or the empty set if `lo > hi`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        Self::from_ranges([(lo, hi)])
    }

    /// Normalizes arbitrary (possibly overlapping, unsorted, empty) intervals.
    pub fn from_ranges(ranges: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut v: Vec<(i64, i64)> = ranges.into_iter().filter(|(lo, hi)| lo <= hi).collect();
        v.sort_unstable();
        let mut out: Vec<(i64, i64)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if (lo as i128) <= last.1 as i128 + 1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Self { ranges: out }
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo <= v && v <= hi)
    }

    /// The only member, if there is exactly one.
    pub fn as_single(&self) -> Option<i64> {
        match self.ranges[..] {
            [(lo, hi)] if lo == hi => Some(lo),
            _ => None,
        }
    }

    pub fn intersect(&self, other: &RangeSet) -> RangeSet {
        let (a, b) = (&self.ranges, &other.ranges);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        RangeSet { ranges: out }
    }

    pub fn union(&self, other: &RangeSet) -> RangeSet {
        RangeSet::from_ranges(self.ranges.iter().chain(&other.ranges).copied())
    }

    pub fn complement(&self) -> RangeSet {
        self.complement_in(Universe::I64)
    }

    pub fn complement_in(&self, u: Universe) -> RangeSet {
        let mut out = Vec::new();
        let mut next = u.min as i128;
        for &(lo, hi) in &self.ranges {
            if (lo as i128) > next {
                out.push((next as i64, lo - 1));
            }
            next = hi as i128 + 1;
        }
        if next <= u.max as i128 {
            out.push((next as i64, u.max));
        }
        RangeSet { ranges: out }
    }

    /// `{ v + k }` with wraparound; an interval crossing the top of the
    /// universe splits in two.
    pub fn shift(&self, k: i64) -> RangeSet {
        self.shift_in(k, Universe::I64)
    }

    pub fn shift_in(&self, k: i64, u: Universe) -> RangeSet {
        let size = u.size();
        let mut out = Vec::new();
        for &(lo, hi) in &self.ranges {
            let width = hi as i128 - lo as i128;
            let start = u.wrap(lo as i128 + k as i128);
            let end = start as i128 + width;
            if end <= u.max as i128 {
                out.push((start, end as i64));
            } else {
                out.push((start, u.max));
                out.push((u.min, (end - size) as i64));
            }
        }
        RangeSet::from_ranges(out)
    }

    /// All `v` in the universe with `v rel c`.
    pub fn satisfying(rel: Relation, c: i64, u: Universe) -> RangeSet {
        let below = |v: i64| if v > u.min { RangeSet::interval(u.min, v - 1) } else { RangeSet::empty() };
        let above = |v: i64| if v < u.max { RangeSet::interval(v + 1, u.max) } else { RangeSet::empty() };
        let full = RangeSet::full_in(u);
        let at = RangeSet::single(c).intersect(&full);
        match rel {
            Relation::Eq => at,
            Relation::Ne => at.complement_in(u),
            Relation::Lt => below(c),
            Relation::Le => below(c).union(&at),
            Relation::Gt => above(c),
            Relation::Ge => above(c).union(&at),
        }
        .intersect(&full)
    }
}

fn bound(v: i64) -> String {
    match v {
        i64::MIN => "IMIN".into(),
        i64::MAX => "IMAX".into(),
        v => v.to_string(),
    }
}

impl fmt::Display for RangeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ranges.is_empty() {
            return f.write_str("∅");
        }
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "[{}, {}]", bound(lo), bound(hi))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Eq,
        Relation::Ne,
        Relation::Lt,
        Relation::Le,
        Relation::Gt,
        Relation::Ge,
    ];

    pub fn negate(self) -> Relation {
        match self {
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Gt => Relation::Le,
            Relation::Ge => Relation::Lt,
        }
    }

    /// `c rel x` rewritten as `x rel' c`.
    pub fn flip(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Gt => Relation::Lt,
            Relation::Ge => Relation::Le,
            r => r,
        }
    }

    pub fn from_binop(op: BinOp) -> Option<Relation> {
        Some(match op {
            BinOp::Eq => Relation::Eq,
            BinOp::Ne => Relation::Ne,
            BinOp::Lt => Relation::Lt,
            BinOp::Le => Relation::Le,
            BinOp::Gt => Relation::Gt,
            BinOp::Ge => Relation::Ge,
            _ => return None,
        })
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Relation::Eq => a == b,
            Relation::Ne => a != b,
            Relation::Lt => a < b,
            Relation::Le => a <= b,
            Relation::Gt => a > b,
            Relation::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// Symbolic expressions tracked precisely: a symbol, or a symbol plus a
/// nonzero constant (wrapping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymExpr {
    Atom(SymbolId),
    OffsetOf(SymbolId, i64),
}

/// `e + k` folds offsets and collapses a zero offset to the atom.
impl std::ops::Add<i64> for SymExpr {
    type Output = SymExpr;

    fn add(self, k: i64) -> SymExpr {
        match self.offset().wrapping_add(k) {
            0 => SymExpr::Atom(self.symbol()),
            k => SymExpr::OffsetOf(self.symbol(), k),
        }
    }
}

impl SymExpr {
    pub fn symbol(self) -> SymbolId {
        match self {
            SymExpr::Atom(s) | SymExpr::OffsetOf(s, _) => s,
        }
    }

    pub fn offset(self) -> i64 {
        match self {
            SymExpr::Atom(_) => 0,
            SymExpr::OffsetOf(_, k) => k,
        }
    }

    /// Renders with the given symbol name, e.g. `$b+1`.
    pub fn display_with(self, name: &str) -> String {
        match self {
            SymExpr::Atom(_) => name.to_string(),
            SymExpr::OffsetOf(_, k) if k < 0 => format!("{name}-{}", k.unsigned_abs()),
            SymExpr::OffsetOf(_, k) => format!("{name}+{k}"),
        }
    }
}

/// Per-symbol constraints. A missing symbol is unconstrained; a present one
/// never maps to the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintMap {
    universe_bits: u8,
    map: BTreeMap<SymbolId, RangeSet>,
}

impl ConstraintMap {
    pub fn new() -> Self {
        Self::in_universe(64)
    }

    pub fn in_universe(bits: u8) -> Self {
        Self {
            universe_bits: bits,
            map: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> Universe {
        Universe::bits(self.universe_bits as u32)
    }

    /// Effective range of `s`.
    pub fn range(&self, s: SymbolId) -> RangeSet {
        self.map
            .get(&s)
            .cloned()
            .unwrap_or_else(|| RangeSet::full_in(self.universe()))
    }

    /// Effective range of `e`, i.e. the range of its symbol shifted.
    pub fn range_of(&self, e: SymExpr) -> RangeSet {
        self.range(e.symbol()).shift_in(e.offset(), self.universe())
    }

    pub fn get(&self, s: SymbolId) -> Option<&RangeSet> {
        self.map.get(&s)
    }

    /// Records `s` explicitly (with its current effective range), so that
    /// dumps show it even while unconstrained.
    pub fn track(&mut self, s: SymbolId) {
        let r = self.range(s);
        self.map.insert(s, r);
    }

    pub fn set(&mut self, s: SymbolId, r: RangeSet) {
        assert!(!r.is_empty(), "constraint maps never hold empty ranges");
        self.map.insert(s, r);
    }

    pub fn remove(&mut self, s: SymbolId) -> Option<RangeSet> {
        self.map.remove(&s)
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.map.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &RangeSet)> {
        self.map.iter().map(|(&s, r)| (s, r))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(SymbolId) -> bool) {
        self.map.retain(|&s, _| keep(s));
    }
}

impl Default for ConstraintMap {
    fn default() -> Self {
        Self::new()
    }
}

/// Refines `cm` with `e rel c` (or its negation when `holds` is false).
/// Returns `None` when the path becomes infeasible.
pub fn assume(cm: &ConstraintMap, e: SymExpr, rel: Relation, c: i64, holds: bool) -> Option<ConstraintMap> {
    let u = cm.universe();
    let rel = if holds { rel } else { rel.negate() };
    // s + k rel c  <=>  s in shift({v | v rel c}, -k)
    let allowed = RangeSet::satisfying(rel, c, u).shift_in(e.offset().wrapping_neg(), u);
    let refined = cm.range(e.symbol()).intersect(&allowed);
    if refined.is_empty() {
        return None;
    }
    let mut out = cm.clone();
    out.map.insert(e.symbol(), refined);
    Some(out)
}

/// Restricts `e` to `range`. `None` if nothing remains.
pub fn assume_in_range(cm: &ConstraintMap, e: SymExpr, range: &RangeSet) -> Option<ConstraintMap> {
    let u = cm.universe();
    let allowed = range.shift_in(e.offset().wrapping_neg(), u);
    let refined = cm.range(e.symbol()).intersect(&allowed);
    if refined.is_empty() {
        return None;
    }
    let mut out = cm.clone();
    out.map.insert(e.symbol(), refined);
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zeroness {
    NeverZero,
    OnlyZero,
    MaybeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryValue {
    Concrete(i64),
    Symbolic(SymExpr),
}

pub fn query_zeroness(cm: &ConstraintMap, v: QueryValue) -> Zeroness {
    match v {
        QueryValue::Concrete(0) => Zeroness::OnlyZero,
        QueryValue::Concrete(_) => Zeroness::NeverZero,
        QueryValue::Symbolic(e) => {
            let r = cm.range_of(e);
            if r.as_single() == Some(0) {
                Zeroness::OnlyZero
            } else if !r.contains(0) {
                Zeroness::NeverZero
            } else {
                Zeroness::MaybeZero
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivByZero;

/// Two's-complement evaluation of a MiniC binary operator. `&&` and `||` are
/// evaluated on truth values (both operands already computed).
pub fn eval_concrete_binop(lhs: i64, op: BinOp, rhs: i64) -> Result<i64, DivByZero> {
    Ok(match op {
        BinOp::Add => lhs.wrapping_add(rhs),
        BinOp::Sub => lhs.wrapping_sub(rhs),
        BinOp::Mul => lhs.wrapping_mul(rhs),
        BinOp::Div if rhs == 0 => return Err(DivByZero),
        BinOp::Rem if rhs == 0 => return Err(DivByZero),
        BinOp::Div => lhs.wrapping_div(rhs),
        BinOp::Rem => lhs.wrapping_rem(rhs),
        BinOp::And => (lhs != 0 && rhs != 0) as i64,
        BinOp::Or => (lhs != 0 || rhs != 0) as i64,
        rel => Relation::from_binop(rel)
            .expect("remaining operators are relational")
            .holds(lhs, rhs) as i64,
    })
}
