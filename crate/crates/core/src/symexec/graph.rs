use std::collections::HashMap;
use std::rc::Rc;

use serde_json::{json, Value};

use super::state::{FrameId, ProgramState, SymbolTable};
use crate::cfg::BlockId;
use crate::frontend::{Ast, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    BlockEntrance(BlockId),
    /// Before element `index` of `block`, which evaluates `node`.
    PreStmt { block: BlockId, index: usize, node: NodeId },
    PostStmt { block: BlockId, index: usize, node: NodeId },
    BranchTaken { block: BlockId, which: bool },
    CallEnter { call: NodeId, callee: NodeId },
    CallExit { call: NodeId },
    EndOfFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProgramPoint {
    pub kind: PointKind,
    pub frame: FrameId,
}

impl ProgramPoint {
    pub fn new(kind: PointKind, frame: FrameId) -> Self {
        Self { kind, frame }
    }

    fn to_json(self) -> Value {
        let frame = self.frame.0;
        match self.kind {
            PointKind::BlockEntrance(b) => json!({"kind": "BlockEntrance", "block": b.0, "frame": frame}),
            PointKind::PreStmt { block, node, .. } => {
                json!({"kind": "PreStmt", "block": block.0, "stmt": node.0, "frame": frame})
            }
            PointKind::PostStmt { block, node, .. } => {
                json!({"kind": "PostStmt", "block": block.0, "stmt": node.0, "frame": frame})
            }
            PointKind::BranchTaken { block, which } => {
                json!({"kind": "BranchTaken", "block": block.0, "which": which, "frame": frame})
            }
            PointKind::CallEnter { call, callee } => {
                json!({"kind": "CallEnter", "stmt": call.0, "callee": callee.0, "frame": frame})
            }
            PointKind::CallExit { call } => json!({"kind": "CallExit", "stmt": call.0, "frame": frame}),
            PointKind::EndOfFunction => json!({"kind": "EndOfFunction", "frame": frame}),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplodedNode {
    pub id: usize,
    pub point: ProgramPoint,
    pub state: Rc<ProgramState>,
    pub sink: bool,
    pub preds: Vec<usize>,
    pub succs: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ExplodedGraph {
    pub nodes: Vec<ExplodedNode>,
    pub roots: Vec<usize>,
    index: HashMap<(ProgramPoint, Rc<ProgramState>), usize>,
}

impl ExplodedGraph {
    /// Returns the node for `(point, state)` and whether it was created now.
    /// An existing node only gains the edge from `pred`.
    pub fn get_or_insert(
        &mut self,
        point: ProgramPoint,
        state: ProgramState,
        sink: bool,
        pred: Option<usize>,
    ) -> (usize, bool) {
        let state = Rc::new(state);
        let key = (point, state.clone());
        let (id, fresh) = match self.index.get(&key) {
            Some(&id) => (id, false),
            None => {
                let id = self.nodes.len();
                self.nodes.push(ExplodedNode {
                    id,
                    point,
                    state,
                    sink,
                    preds: Vec::new(),
                    succs: Vec::new(),
                });
                self.index.insert(key, id);
                (id, true)
            }
        };
        match pred {
            Some(p) => {
                if !self.nodes[p].succs.contains(&id) {
                    self.nodes[p].succs.push(id);
                    self.nodes[id].preds.push(p);
                }
            }
            None if fresh => self.roots.push(id),
            None => {}
        }
        (id, fresh)
    }

    pub fn node(&self, id: usize) -> &ExplodedNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on the first-predecessor chain from a root to `id`, root first.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(&p) = self.nodes[cur].preds.first() {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Non-sink nodes without successors.
    pub fn leaves(&self) -> impl Iterator<Item = &ExplodedNode> {
        self.nodes.iter().filter(|n| !n.sink && n.succs.is_empty())
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .flat_map(|n| n.succs.iter().map(move |&s| (n.id, s)))
            .collect()
    }

    pub fn to_json(&self, ast: &Ast, symbols: &SymbolTable) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "point": n.point.to_json(),
                    "sink": n.sink,
                    "state": state_json(ast, symbols, &n.state),
                })
            })
            .collect();
        let edges: Vec<Value> = self.edges().into_iter().map(|(a, b)| json!([a, b])).collect();
        json!({"nodes": nodes, "edges": edges})
    }
}

/// Readable rendering of a state: store and constraints keyed by their
/// display names.
pub fn state_json(ast: &Ast, symbols: &SymbolTable, s: &ProgramState) -> Value {
    let env: Vec<Value> = s
        .env
        .iter()
        .map(|((f, n), v)| json!({"frame": f.0, "expr": n.0, "value": symbols.sval(ast, v)}))
        .collect();
    let store: serde_json::Map<String, Value> = s
        .store
        .iter()
        .map(|(r, v)| (symbols.region(ast, r), Value::String(symbols.sval(ast, v))))
        .collect();
    let constraints: serde_json::Map<String, Value> = s
        .constraints
        .iter()
        .map(|(sym, r)| (symbols.name(sym).to_string(), Value::String(r.to_string())))
        .collect();
    let gdm: Vec<&String> = s.gdm.keys().collect();
    json!({"env": env, "store": store, "constraints": constraints, "gdm": gdm})
}
