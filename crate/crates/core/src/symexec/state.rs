use std::collections::BTreeMap;
use std::fmt;

use crate::constraints::{ConstraintMap, SymExpr, SymbolId};
use crate::frontend::{Ast, NodeId};

/// Activation of a function during one top-level analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId(pub u32);

impl FrameId {
    pub const TOP: FrameId = FrameId(0);
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemRegion {
    Var { frame: FrameId, decl: NodeId },
    Element { base: Box<MemRegion>, index: Box<SVal> },
}

impl MemRegion {
    pub fn var(frame: FrameId, decl: NodeId) -> Self {
        MemRegion::Var { frame, decl }
    }

    /// The variable region at the root of this region.
    pub fn base(&self) -> &MemRegion {
        match self {
            MemRegion::Var { .. } => self,
            MemRegion::Element { base, .. } => base.base(),
        }
    }

    pub fn frame(&self) -> FrameId {
        match self.base() {
            MemRegion::Var { frame, .. } => *frame,
            MemRegion::Element { .. } => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SVal {
    /// Never-written storage.
    Undefined,
    Unknown,
    Int(i64),
    Sym(SymExpr),
    Region(MemRegion),
}

impl SVal {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            SVal::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<SymExpr> {
        match self {
            SVal::Sym(e) => Some(*e),
            _ => None,
        }
    }

    fn symbols(&self, out: &mut Vec<SymbolId>) {
        match self {
            SVal::Sym(e) => out.push(e.symbol()),
            SVal::Region(r) => region_symbols(r, out),
            _ => {}
        }
    }
}

fn region_symbols(r: &MemRegion, out: &mut Vec<SymbolId>) {
    if let MemRegion::Element { base, index } = r {
        region_symbols(base, out);
        index.symbols(out);
    }
}

/// Names of the symbols conjured during one top-level analysis.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    counters: BTreeMap<String, u32>,
}

impl SymbolTable {
    /// A symbol for the initial value of a top-level parameter: `$name`.
    pub fn param(&mut self, name: &str) -> SymbolId {
        self.push(format!("${name}"))
    }

    /// A fresh symbol for a value produced by `origin`: `$origin#N`.
    pub fn conjure(&mut self, origin: &str) -> SymbolId {
        let n = self.counters.entry(origin.to_string()).or_insert(0);
        *n += 1;
        let name = format!("${origin}#{n}");
        self.push(name)
    }

    fn push(&mut self, name: String) -> SymbolId {
        self.names.push(name);
        SymbolId(self.names.len() as u32 - 1)
    }

    pub fn name(&self, s: SymbolId) -> &str {
        &self.names[s.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn expr(&self, e: SymExpr) -> String {
        e.display_with(self.name(e.symbol()))
    }

    pub fn sval(&self, ast: &Ast, v: &SVal) -> String {
        match v {
            SVal::Undefined => "Undefined".into(),
            SVal::Unknown => "Unknown".into(),
            SVal::Int(i) => i.to_string(),
            SVal::Sym(e) => self.expr(*e),
            SVal::Region(r) => format!("&{}", self.region(ast, r)),
        }
    }

    /// `x`, `x@F2` for inlined frames, `a[0]`, `a[$i]`.
    pub fn region(&self, ast: &Ast, r: &MemRegion) -> String {
        match r {
            MemRegion::Var { frame, decl } if *frame == FrameId::TOP => ast.decl_name(*decl).to_string(),
            MemRegion::Var { frame, decl } => format!("{}@{frame}", ast.decl_name(*decl)),
            MemRegion::Element { base, index } => {
                format!("{}[{}]", self.region(ast, base), self.sval(ast, index))
            }
        }
    }
}

/// What a checker remembers about one symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GdmEntry {
    pub tag: String,
    /// The expression that produced the symbol, and the frame it ran in.
    pub origin: NodeId,
    pub frame: FrameId,
}

/// Checker data attached to a state, keyed by checker id.
pub type Gdm = BTreeMap<String, BTreeMap<SymbolId, GdmEntry>>;

/// One symbolic state. Immutable by convention: transitions clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ProgramState {
    pub env: BTreeMap<(FrameId, NodeId), SVal>,
    pub store: BTreeMap<MemRegion, SVal>,
    pub gdm: Gdm,
    pub constraints: ConstraintMap,
}

impl ProgramState {
    pub fn env_value(&self, frame: FrameId, node: NodeId) -> SVal {
        self.env
            .get(&(frame, node))
            .cloned()
            .unwrap_or(SVal::Unknown)
    }

    /// Reads a region: exact binding, then the array's default binding,
    /// otherwise `Undefined`. A symbolic index can alias any element, so it
    /// only resolves through an exact binding when it is the array's only
    /// one.
    pub fn load(&self, region: &MemRegion) -> SVal {
        if let Some(v) = self.store.get(region) {
            return v.clone();
        }
        match region {
            MemRegion::Var { .. } => SVal::Undefined,
            MemRegion::Element { base, index } => {
                if !matches!(**index, SVal::Int(_)) {
                    let others = self.elements_of(base).next().is_some();
                    if others || matches!(**index, SVal::Unknown) {
                        return SVal::Unknown;
                    }
                }
                self.store.get(base).cloned().unwrap_or(SVal::Undefined)
            }
        }
    }

    fn elements_of<'a>(&'a self, base: &'a MemRegion) -> impl Iterator<Item = (&'a MemRegion, &'a SVal)> + 'a {
        self.store.iter().filter(move |(r, _)| match r {
            MemRegion::Element { base: b, .. } => **b == *base,
            _ => false,
        })
    }

    /// Writes a region. Writes through a non-concrete index may hit any
    /// element and so forget all other element bindings.
    pub fn bind(&mut self, region: MemRegion, value: SVal) {
        let MemRegion::Element { base, index } = &region else {
            self.store.insert(region, value);
            return;
        };
        let base = (**base).clone();
        match **index {
            SVal::Int(_) => {
                let symbolic: Vec<MemRegion> = self
                    .elements_of(&base)
                    .filter(|(r, _)| matches!(r, MemRegion::Element { index, .. } if !matches!(**index, SVal::Int(_))))
                    .map(|(r, _)| r.clone())
                    .collect();
                if !symbolic.is_empty() {
                    for r in symbolic {
                        self.store.remove(&r);
                    }
                    self.store.insert(base, SVal::Unknown);
                }
                self.store.insert(region, value);
            }
            _ => {
                self.invalidate_array(&base);
                if !matches!(**index, SVal::Unknown) {
                    self.store.insert(region, value);
                }
            }
        }
    }

    /// Forgets every element of an array; reads yield `Unknown` afterwards.
    pub fn invalidate_array(&mut self, base: &MemRegion) {
        self.clear_elements(base);
        self.store.insert(base.clone(), SVal::Unknown);
    }

    /// Removes element bindings of `base` (not its default binding).
    pub fn clear_elements(&mut self, base: &MemRegion) {
        let elems: Vec<MemRegion> = self.elements_of(base).map(|(r, _)| r.clone()).collect();
        for r in elems {
            self.store.remove(&r);
        }
    }

    /// Symbols referenced from the environment or the store.
    pub fn referenced_symbols(&self) -> Vec<SymbolId> {
        let mut out = Vec::new();
        for v in self.env.values() {
            v.symbols(&mut out);
        }
        for (r, v) in &self.store {
            region_symbols(r, &mut out);
            v.symbols(&mut out);
        }
        out.sort();
        out.dedup();
        out
    }

    /// Drops constraints on symbols nothing refers to any more.
    pub fn remove_dead_constraints(&mut self) {
        let live = self.referenced_symbols();
        self.constraints.retain(|s| live.binary_search(&s).is_ok());
    }

    /// Removes everything belonging to `frame`.
    pub fn pop_frame(&mut self, frame: FrameId) {
        self.env.retain(|(f, _), _| *f != frame);
        self.store.retain(|r, _| r.frame() != frame);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr() -> MemRegion {
        MemRegion::var(FrameId::TOP, NodeId(1))
    }

    fn elem(i: SVal) -> MemRegion {
        MemRegion::Element {
            base: Box::new(arr()),
            index: Box::new(i),
        }
    }

    #[test]
    fn array_store_semantics() {
        let mut s = ProgramState::default();
        assert_eq!(s.load(&elem(SVal::Int(0))), SVal::Undefined);
        s.bind(elem(SVal::Int(0)), SVal::Int(5));
        s.bind(elem(SVal::Int(1)), SVal::Int(6));
        assert_eq!(s.load(&elem(SVal::Int(1))), SVal::Int(6));
        assert_eq!(s.load(&elem(SVal::Int(2))), SVal::Undefined);

        let i = SVal::Sym(SymExpr::Atom(SymbolId(0)));
        assert_eq!(s.load(&elem(i.clone())), SVal::Unknown);
        s.bind(elem(i.clone()), SVal::Int(7));
        assert_eq!(s.load(&elem(i.clone())), SVal::Int(7));
        assert_eq!(s.load(&elem(SVal::Int(0))), SVal::Unknown);

        s.bind(elem(SVal::Int(0)), SVal::Int(1));
        assert_eq!(s.load(&elem(i)), SVal::Unknown);
        assert_eq!(s.load(&elem(SVal::Int(0))), SVal::Int(1));
        assert_eq!(s.load(&elem(SVal::Int(2))), SVal::Unknown);
    }

    #[test]
    fn dead_constraints() {
        let mut s = ProgramState::default();
        s.constraints.track(SymbolId(0));
        s.constraints.track(SymbolId(1));
        s.store
            .insert(MemRegion::var(FrameId::TOP, NodeId(3)), SVal::Sym(SymExpr::OffsetOf(SymbolId(1), 1)));
        s.remove_dead_constraints();
        assert_eq!(s.constraints.symbols().collect::<Vec<_>>(), vec![SymbolId(1)]);
    }

    #[test]
    fn symbol_names() {
        let mut t = SymbolTable::default();
        let b = t.param("b");
        let x1 = t.conjure("x");
        let x2 = t.conjure("x");
        assert_eq!(t.name(b), "$b");
        assert_eq!(t.name(x1), "$x#1");
        assert_eq!(t.name(x2), "$x#2");
        assert_eq!(t.expr(SymExpr::OffsetOf(b, 1)), "$b+1");
    }
}
