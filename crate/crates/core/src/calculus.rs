//! Abstract syntax of the future calculus and its evaluation/claim contexts.
//!
//! Expressions are integer literals, additions, future creations and future
//! references. Only the first three appear in source programs; references are
//! introduced by the `Create` rule and removed by `Claim`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a future value. Also names the thread (closure) realizing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FutureId(pub u64);

impl fmt::Display for FutureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fv{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Add(Box<Expr>, Box<Expr>),
    Future(Box<Expr>),
    Ref(FutureId),
}

impl Expr {
    pub fn int(value: i64) -> Self {
        Expr::Int(value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(left: Expr, right: Expr) -> Self {
        Expr::Add(Box::new(left), Box::new(right))
    }

    pub fn future(body: Expr) -> Self {
        Expr::Future(Box::new(body))
    }

    pub fn reference(id: FutureId) -> Self {
        Expr::Ref(id)
    }

    /// Values are integers and future references.
    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Ref(_))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Expr::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Ref(_) => 1,
            Expr::Add(l, r) => 1 + l.node_count() + r.node_count(),
            Expr::Future(body) => 1 + body.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Ref(_) => 1,
            Expr::Add(l, r) => 1 + l.depth().max(r.depth()),
            Expr::Future(body) => 1 + body.depth(),
        }
    }

    /// Deepest chain of directly or indirectly nested `future` nodes.
    pub fn future_nesting(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Ref(_) => 0,
            Expr::Add(l, r) => l.future_nesting().max(r.future_nesting()),
            Expr::Future(body) => 1 + body.future_nesting(),
        }
    }

    pub fn contains_ref(&self) -> bool {
        match self {
            Expr::Int(_) => false,
            Expr::Ref(_) => true,
            Expr::Add(l, r) => l.contains_ref() || r.contains_ref(),
            Expr::Future(body) => body.contains_ref(),
        }
    }

    /// Future references in left-to-right order.
    pub fn refs(&self) -> Vec<FutureId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut Vec<FutureId>) {
        match self {
            Expr::Int(_) => {}
            Expr::Ref(id) => out.push(*id),
            Expr::Add(l, r) => {
                l.collect_refs(out);
                r.collect_refs(out);
            }
            Expr::Future(body) => body.collect_refs(out),
        }
    }

    /// Rewrites every future reference through `f`.
    pub fn map_refs(&self, f: &mut impl FnMut(FutureId) -> FutureId) -> Expr {
        match self {
            Expr::Int(i) => Expr::Int(*i),
            Expr::Ref(id) => Expr::Ref(f(*id)),
            Expr::Add(l, r) => {
                let l = l.map_refs(f);
                let r = r.map_refs(f);
                Expr::add(l, r)
            }
            Expr::Future(body) => Expr::future(body.map_refs(f)),
        }
    }
}

/// One step of a context path. The stored expression is the sibling of the hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Frame {
    /// `• + e`
    AddLeft(Expr),
    /// `v + •`
    AddRight(Expr),
}

/// An expression with a single hole, stored outermost frame first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Context {
    frames: Vec<Frame>,
}

impl Context {
    pub fn hole() -> Self {
        Self::default()
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn push(&mut self, frame: Frame) {
        self.frames.push(frame);
    }

    /// Fills the hole. Siblings travel with the context, so this cannot fail.
    pub fn plug(&self, filler: Expr) -> Expr {
        self.frames
            .iter()
            .rev()
            .fold(filler, |inner, frame| match frame {
                Frame::AddLeft(right) => Expr::add(inner, right.clone()),
                Frame::AddRight(left) => Expr::add(left.clone(), inner),
            })
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render by plugging a sentinel reference and substituting the bullet.
        const SENTINEL: FutureId = FutureId(u64::MAX);
        let rendered = crate::parser::unparse(&self.plug(Expr::Ref(SENTINEL)));
        f.write_str(&rendered.replace(&SENTINEL.to_string(), "•"))
    }
}

/// The unique decomposition of an expression into a context and the next thing
/// to happen in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RedexSite {
    Arith {
        context: Context,
        left: i64,
        right: i64,
    },
    Create {
        context: Context,
        body: Expr,
    },
    Claim {
        context: Context,
        target: FutureId,
    },
    /// Fully evaluated integer.
    NoRedex(i64),
}

impl RedexSite {
    pub fn context(&self) -> Option<&Context> {
        match self {
            RedexSite::Arith { context, .. }
            | RedexSite::Create { context, .. }
            | RedexSite::Claim { context, .. } => Some(context),
            RedexSite::NoRedex(_) => None,
        }
    }

    /// The subterm sitting in the hole; `plug(context, redex) == original`.
    pub fn redex(&self) -> Expr {
        match self {
            RedexSite::Arith { left, right, .. } => Expr::add(Expr::Int(*left), Expr::Int(*right)),
            RedexSite::Create { body, .. } => Expr::future(body.clone()),
            RedexSite::Claim { target, .. } => Expr::Ref(*target),
            RedexSite::NoRedex(i) => Expr::Int(*i),
        }
    }
}

/// Locates the next redex of `expr`.
///
/// Evaluation-context redexes (`E ::= • | E + e | v + E`) take priority.
/// Otherwise the claim context `C ::= • | C + e | i + C` picks the leftmost
/// future reference whose value is needed.
pub fn decompose(expr: &Expr) -> RedexSite {
    if let Expr::Int(i) = expr {
        return RedexSite::NoRedex(*i);
    }
    let mut context = Context::hole();
    if let Some(site) = eval_redex(expr, &mut context) {
        return site;
    }
    let mut context = Context::hole();
    let target = claim_target(expr, &mut context);
    RedexSite::Claim { context, target }
}

fn eval_redex(expr: &Expr, context: &mut Context) -> Option<RedexSite> {
    match expr {
        Expr::Int(_) | Expr::Ref(_) => None,
        Expr::Future(body) => Some(RedexSite::Create {
            context: context.clone(),
            body: (**body).clone(),
        }),
        Expr::Add(l, r) => {
            if !l.is_value() {
                context.push(Frame::AddLeft((**r).clone()));
                eval_redex(l, context)
            } else if !r.is_value() {
                context.push(Frame::AddRight((**l).clone()));
                eval_redex(r, context)
            } else if let (Expr::Int(a), Expr::Int(b)) = (&**l, &**r) {
                Some(RedexSite::Arith {
                    context: context.clone(),
                    left: *a,
                    right: *b,
                })
            } else {
                None
            }
        }
    }
}

// Only called when `expr` has no evaluation-context redex and is not an
// integer, which guarantees a reference is reachable along this path.
fn claim_target(expr: &Expr, context: &mut Context) -> FutureId {
    match expr {
        Expr::Ref(id) => *id,
        Expr::Add(l, r) => match &**l {
            Expr::Ref(id) => {
                context.push(Frame::AddLeft((**r).clone()));
                *id
            }
            Expr::Int(_) => {
                context.push(Frame::AddRight((**l).clone()));
                claim_target(r, context)
            }
            _ => {
                context.push(Frame::AddLeft((**r).clone()));
                claim_target(l, context)
            }
        },
        Expr::Int(_) | Expr::Future(_) => unreachable!("claim search on {expr:?}"),
    }
}

pub fn plug(context: &Context, filler: Expr) -> Expr {
    context.plug(filler)
}

/// Serial elision: erase every `future` and add. Integer overflow wraps.
///
/// # Panics
///
/// If `expr` contains a future reference.
pub fn eval_sequential(expr: &Expr) -> i64 {
    match expr {
        Expr::Int(i) => *i,
        Expr::Add(l, r) => eval_sequential(l).wrapping_add(eval_sequential(r)),
        Expr::Future(body) => eval_sequential(body),
        Expr::Ref(id) => panic!("eval_sequential on unresolved future {id}"),
    }
}
