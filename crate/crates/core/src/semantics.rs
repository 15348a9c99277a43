//! Fixed-width integer semantics shared by the concrete interpreter, the
//! symbolic executor and the solver.
//!
//! Values are carried as `i64` but always normalized to a signed
//! two's-complement integer of [`IntWidth`] bits. Booleans are integers:
//! comparisons and connectives yield `0` or `1`, and any non-zero value is
//! truthy.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{BinOp, Expr, UnOp};

/// Bit width of the machine integers, between 2 and 32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntWidth(u32);

impl IntWidth {
    pub const DEFAULT: IntWidth = IntWidth(16);

    pub fn new(bits: u32) -> Option<Self> {
        (2..=32).contains(&bits).then_some(IntWidth(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn min(self) -> i64 {
        -(1i64 << (self.0 - 1))
    }

    pub fn max(self) -> i64 {
        (1i64 << (self.0 - 1)) - 1
    }

    pub fn wrap(self, v: i64) -> i64 {
        let shift = 64 - self.0;
        (v << shift) >> shift
    }

    pub fn contains(self, v: i64) -> bool {
        v >= self.min() && v <= self.max()
    }
}

impl Default for IntWidth {
    fn default() -> Self {
        IntWidth::DEFAULT
    }
}

/// Closed integer interval `[lo, hi]`; used for input domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub const DEFAULT_DOMAIN: Interval = Interval { lo: -100, hi: 100 };

    pub fn new(lo: i64, hi: i64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn width(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeErrorKind {
    DivisionByZero,
    IndexOutOfBounds,
    UndefinedVariable,
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuntimeErrorKind::DivisionByZero => "division by zero",
            RuntimeErrorKind::IndexOutOfBounds => "index out of bounds",
            RuntimeErrorKind::UndefinedVariable => "undefined variable",
        })
    }
}

pub fn truthy(v: i64) -> bool {
    v != 0
}

pub fn from_bool(b: bool) -> i64 {
    b as i64
}

/// Applies a strict (non short-circuit) binary operator.
///
/// `&&`, `||` and `^` act on truthiness here; short-circuiting is the
/// evaluator's business.
pub fn apply_binary(op: BinOp, a: i64, b: i64, w: IntWidth) -> Result<i64, RuntimeErrorKind> {
    use BinOp::*;
    Ok(match op {
        Add => w.wrap(a + b),
        Sub => w.wrap(a - b),
        Mul => w.wrap(a.wrapping_mul(b)),
        Div => {
            if b == 0 {
                return Err(RuntimeErrorKind::DivisionByZero);
            }
            w.wrap(a / b)
        }
        Rem => {
            if b == 0 {
                return Err(RuntimeErrorKind::DivisionByZero);
            }
            w.wrap(a % b)
        }
        Eq => from_bool(a == b),
        Ne => from_bool(a != b),
        Lt => from_bool(a < b),
        Le => from_bool(a <= b),
        Gt => from_bool(a > b),
        Ge => from_bool(a >= b),
        And => from_bool(truthy(a) && truthy(b)),
        Or => from_bool(truthy(a) || truthy(b)),
        Xor => from_bool(truthy(a) != truthy(b)),
    })
}

/// Total variant of [`apply_binary`]: division and remainder by zero yield 0.
/// Only meaningful where the caller separately guarantees a non-zero divisor.
pub fn apply_binary_total(op: BinOp, a: i64, b: i64, w: IntWidth) -> i64 {
    apply_binary(op, a, b, w).unwrap_or(0)
}

pub fn apply_unary(op: UnOp, a: i64, w: IntWidth) -> i64 {
    match op {
        UnOp::Neg => w.wrap(-a),
        UnOp::Not => from_bool(!truthy(a)),
        // abs(INT_MIN) wraps back to INT_MIN.
        UnOp::Abs => w.wrap(a.abs()),
    }
}

/// A concrete runtime value of a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(i64),
    Array(Vec<i64>),
}

/// Concrete test data: one value per entry-function parameter.
pub type TestInput = BTreeMap<String, Value>;

/// Concrete program store: scalar and array variables by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Store {
    pub scalars: BTreeMap<String, i64>,
    pub arrays: BTreeMap<String, Vec<i64>>,
}

impl Store {
    pub fn from_input(input: &TestInput) -> Self {
        let mut store = Store::default();
        for (name, value) in input {
            match value {
                Value::Scalar(v) => {
                    store.scalars.insert(name.clone(), *v);
                }
                Value::Array(cells) => {
                    store.arrays.insert(name.clone(), cells.clone());
                }
            }
        }
        store
    }

    /// Drops normalization temporaries (reserved `__` prefix).
    pub fn without_temporaries(&self) -> Store {
        Store {
            scalars: self
                .scalars
                .iter()
                .filter(|(k, _)| !k.starts_with("__"))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
            arrays: self.arrays.clone(),
        }
    }
}

/// Variable access used by [`eval`]. Implemented by the mutable [`Store`]
/// (post-increment allowed) and by the read-only [`View`].
pub trait Env {
    fn read(&self, name: &str) -> Result<i64, RuntimeErrorKind>;
    fn read_elem(&self, name: &str, idx: i64) -> Result<i64, RuntimeErrorKind>;
    /// Post-increment/decrement: returns the old value.
    fn bump(&mut self, name: &str, delta: i64, w: IntWidth) -> Result<i64, RuntimeErrorKind>;
}

fn read_array(arrays: &BTreeMap<String, Vec<i64>>, name: &str, idx: i64) -> Result<i64, RuntimeErrorKind> {
    let cells = arrays.get(name).ok_or(RuntimeErrorKind::UndefinedVariable)?;
    if idx < 0 || idx as usize >= cells.len() {
        return Err(RuntimeErrorKind::IndexOutOfBounds);
    }
    Ok(cells[idx as usize])
}

impl Env for Store {
    fn read(&self, name: &str) -> Result<i64, RuntimeErrorKind> {
        self.scalars.get(name).copied().ok_or(RuntimeErrorKind::UndefinedVariable)
    }

    fn read_elem(&self, name: &str, idx: i64) -> Result<i64, RuntimeErrorKind> {
        read_array(&self.arrays, name, idx)
    }

    fn bump(&mut self, name: &str, delta: i64, w: IntWidth) -> Result<i64, RuntimeErrorKind> {
        let slot = self.scalars.get_mut(name).ok_or(RuntimeErrorKind::UndefinedVariable)?;
        let old = *slot;
        *slot = w.wrap(old + delta);
        Ok(old)
    }
}

/// Read-only view of a store, for side-effect-free expressions.
pub struct View<'a>(pub &'a Store);

impl Env for View<'_> {
    fn read(&self, name: &str) -> Result<i64, RuntimeErrorKind> {
        self.0.read(name)
    }

    fn read_elem(&self, name: &str, idx: i64) -> Result<i64, RuntimeErrorKind> {
        self.0.read_elem(name, idx)
    }

    fn bump(&mut self, _name: &str, _delta: i64, _w: IntWidth) -> Result<i64, RuntimeErrorKind> {
        // Only reachable if a side-effect expression slipped into a pure context.
        Err(RuntimeErrorKind::UndefinedVariable)
    }
}

/// Evaluates an expression left to right with C-like short-circuiting of
/// `&&` and `||`.
pub fn eval<E: Env>(expr: &Expr, env: &mut E, w: IntWidth) -> Result<i64, RuntimeErrorKind> {
    match expr {
        Expr::Int(v) => Ok(w.wrap(*v)),
        Expr::Bool(b) => Ok(from_bool(*b)),
        Expr::Var(name) => env.read(name),
        Expr::Index(name, idx) => {
            let i = eval(idx, env, w)?;
            env.read_elem(name, i)
        }
        Expr::Unary(op, e) => Ok(apply_unary(*op, eval(e, env, w)?, w)),
        Expr::Binary(BinOp::And, l, r) => {
            if !truthy(eval(l, env, w)?) {
                return Ok(0);
            }
            Ok(from_bool(truthy(eval(r, env, w)?)))
        }
        Expr::Binary(BinOp::Or, l, r) => {
            if truthy(eval(l, env, w)?) {
                return Ok(1);
            }
            Ok(from_bool(truthy(eval(r, env, w)?)))
        }
        Expr::Binary(op, l, r) => {
            let a = eval(l, env, w)?;
            let b = eval(r, env, w)?;
            apply_binary(*op, a, b, w)
        }
        Expr::PostInc(name) => env.bump(name, 1, w),
        Expr::PostDec(name) => env.bump(name, -1, w),
    }
}

/// Evaluates a side-effect-free expression.
pub fn eval_pure(expr: &Expr, store: &Store, w: IntWidth) -> Result<i64, RuntimeErrorKind> {
    eval(expr, &mut View(store), w)
}

/// Label predicate semantics: a predicate whose evaluation traps is not
/// satisfied.
pub fn holds(pred: &Expr, store: &Store, w: IntWidth) -> bool {
    matches!(eval_pure(pred, store, w), Ok(v) if truthy(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraparound_at_width() {
        let w = IntWidth::new(8).unwrap();
        assert_eq!(w.wrap(127 + 1), -128);
        assert_eq!(apply_binary(BinOp::Mul, 16, 16, w).unwrap(), 0);
        assert_eq!(apply_unary(UnOp::Abs, -128, w), -128);
        assert_eq!(apply_unary(UnOp::Neg, -128, w), -128);
        assert_eq!(apply_binary(BinOp::Div, -128, -1, w).unwrap(), -128);
    }

    #[test]
    fn division_by_zero_traps() {
        let w = IntWidth::DEFAULT;
        assert_eq!(apply_binary(BinOp::Div, 1, 0, w), Err(RuntimeErrorKind::DivisionByZero));
        assert_eq!(apply_binary(BinOp::Rem, 1, 0, w), Err(RuntimeErrorKind::DivisionByZero));
        assert_eq!(apply_binary(BinOp::Rem, -7, 2, w), Ok(-1));
    }

    #[test]
    fn short_circuit_skips_trap() {
        let mut store = Store::default();
        store.scalars.insert("x".into(), 0);
        let e = Expr::Binary(
            BinOp::And,
            Box::new(Expr::Binary(BinOp::Ne, Box::new(Expr::Var("x".into())), Box::new(Expr::Int(0)))),
            Box::new(Expr::Binary(
                BinOp::Gt,
                Box::new(Expr::Binary(BinOp::Div, Box::new(Expr::Int(10)), Box::new(Expr::Var("x".into())))),
                Box::new(Expr::Int(1)),
            )),
        );
        assert_eq!(eval_pure(&e, &store, IntWidth::DEFAULT), Ok(0));
    }
}
