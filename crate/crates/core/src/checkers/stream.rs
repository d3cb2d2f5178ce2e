//! Handles returned by `open()` must be closed exactly once.

use std::collections::BTreeMap;

use crate::frontend::{Callee, Intrinsic, NodeId};
use crate::symexec::{Checker, CheckerContext, FrameId, GdmEntry, SVal, Track};

pub const STREAM: &str = "resource.Stream";

const OPEN: &str = "Open";
const CLOSED: &str = "Closed";

pub struct Stream;

impl Checker for Stream {
    fn id(&self) -> &'static str {
        STREAM
    }

    fn post_call(&self, ctx: &mut CheckerContext<'_>, call: NodeId) {
        let ast = ctx.ast();
        match ctx.unit.sema.callee(call) {
            Some(Callee::Intrinsic(Intrinsic::Open)) => {
                let SVal::Sym(e) = ctx.value(call) else { return };
                let entry = GdmEntry {
                    tag: OPEN.into(),
                    origin: call,
                    frame: ctx.frame,
                };
                ctx.state.gdm.entry(STREAM.into()).or_default().insert(e.symbol(), entry);
            }
            Some(Callee::Intrinsic(Intrinsic::Close)) => {
                // Only the exact handle counts; `h + 1` is not a handle.
                let SVal::Sym(e) = ctx.value(ast.children(call)[0]) else { return };
                if e.offset() != 0 {
                    return;
                }
                let Some(entry) = ctx.state.gdm.get_mut(STREAM).and_then(|m| m.get_mut(&e.symbol())) else {
                    return;
                };
                if entry.tag == CLOSED {
                    let track = Track::Expr {
                        frame: entry.frame,
                        node: entry.origin,
                        note: "Stream opened here".into(),
                    };
                    ctx.report(STREAM, "Stream closed twice", ast.loc(call).clone(), track);
                    ctx.sink();
                } else {
                    entry.tag = CLOSED.into();
                }
            }
            _ => {}
        }
    }

    fn end_of_path(&self, ctx: &mut CheckerContext<'_>) {
        let ast = ctx.ast();
        let open: Vec<(NodeId, FrameId)> = ctx
            .state
            .gdm
            .get(STREAM)
            .map(BTreeMap::values)
            .into_iter()
            .flatten()
            .filter(|e| e.tag == OPEN)
            .map(|e| (e.origin, e.frame))
            .collect();
        for (origin, frame) in open {
            let track = Track::Expr {
                frame,
                node: origin,
                note: "Stream opened here".into(),
            };
            ctx.report(
                STREAM,
                "Opened stream is never closed; potential resource leak",
                ast.loc(origin).clone(),
                track,
            );
        }
    }
}
