//! Interval reasoning over terms: forward range evaluation and HC4-style
//! backward narrowing of variable domains.
//!
//! Ranges are exact at width W: whenever an operation could wrap, the
//! result widens to the full machine range.

use crate::frontend::ast::{BinOp, UnOp};
use crate::semantics::{IntWidth, Interval};

use super::term::{Node, Term};

pub fn full(w: IntWidth) -> Interval {
    Interval::new(w.min(), w.max())
}

pub fn intersect(a: Interval, b: Interval) -> Option<Interval> {
    let lo = a.lo.max(b.lo);
    let hi = a.hi.min(b.hi);
    (lo <= hi).then(|| Interval::new(lo, hi))
}

fn hull(a: Interval, b: Interval) -> Interval {
    Interval::new(a.lo.min(b.lo), a.hi.max(b.hi))
}

fn fit(lo: i128, hi: i128, w: IntWidth) -> Interval {
    if lo >= w.min() as i128 && hi <= w.max() as i128 {
        Interval::new(lo as i64, hi as i64)
    } else {
        full(w)
    }
}

const BOOL: Interval = Interval { lo: 0, hi: 1 };

fn constant_bool(b: bool) -> Interval {
    Interval::new(b as i64, b as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

pub fn truth(r: Interval) -> Truth {
    if r.lo == 0 && r.hi == 0 {
        Truth::False
    } else if !r.contains(0) {
        Truth::True
    } else {
        Truth::Unknown
    }
}

fn truth_interval(t: Truth) -> Interval {
    match t {
        Truth::True => constant_bool(true),
        Truth::False => constant_bool(false),
        Truth::Unknown => BOOL,
    }
}

fn div_range(a: Interval, b: Interval, w: IntWidth) -> Interval {
    if a.contains(w.min()) && b.contains(-1) {
        return full(w);
    }
    if b.lo > 0 || b.hi < 0 {
        let corners = [a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi];
        let lo = *corners.iter().min().unwrap();
        let hi = *corners.iter().max().unwrap();
        return Interval::new(lo, hi);
    }
    // Divisor may be zero (total semantics yields 0) or straddle it.
    let m = a.lo.abs().max(a.hi.abs());
    Interval::new(-m, m)
}

fn rem_range(a: Interval, b: Interval) -> Interval {
    let bmax = b.lo.abs().max(b.hi.abs());
    let bound = (bmax - 1).max(0);
    let lo = if a.lo >= 0 { 0 } else { a.lo.max(-bound) };
    let hi = if a.hi <= 0 { 0 } else { a.hi.min(bound) };
    Interval::new(lo, hi)
}

fn relational_range(op: BinOp, a: Interval, b: Interval) -> Interval {
    let t = match op {
        BinOp::Lt if a.hi < b.lo => Truth::True,
        BinOp::Lt if a.lo >= b.hi => Truth::False,
        BinOp::Le if a.hi <= b.lo => Truth::True,
        BinOp::Le if a.lo > b.hi => Truth::False,
        BinOp::Gt => return relational_range(BinOp::Lt, b, a),
        BinOp::Ge => return relational_range(BinOp::Le, b, a),
        BinOp::Eq if a.lo == a.hi && b.lo == b.hi && a.lo == b.lo => Truth::True,
        BinOp::Eq if intersect(a, b).is_none() => Truth::False,
        BinOp::Ne if a.lo == a.hi && b.lo == b.hi && a.lo == b.lo => Truth::False,
        BinOp::Ne if intersect(a, b).is_none() => Truth::True,
        _ => Truth::Unknown,
    };
    truth_interval(t)
}

/// Sound over-approximation of the values `t` takes when every variable
/// ranges over `doms`.
pub fn range(t: &Term, doms: &[Interval], w: IntWidth) -> Interval {
    match t.node() {
        Node::Const(v) => Interval::new(*v, *v),
        Node::Var(v) => doms[v.0 as usize],
        Node::Unary(op, a) => {
            let r = range(a, doms, w);
            match op {
                UnOp::Neg => fit(-(r.hi as i128), -(r.lo as i128), w),
                UnOp::Not => truth_interval(match truth(r) {
                    Truth::True => Truth::False,
                    Truth::False => Truth::True,
                    Truth::Unknown => Truth::Unknown,
                }),
                UnOp::Abs => {
                    if r.lo >= 0 {
                        r
                    } else if r.hi <= 0 {
                        fit(-(r.hi as i128), -(r.lo as i128), w)
                    } else {
                        fit(0, (-(r.lo as i128)).max(r.hi as i128), w)
                    }
                }
            }
        }
        Node::Binary(op, a, b) => {
            let ra = range(a, doms, w);
            match op {
                BinOp::And => match truth(ra) {
                    Truth::False => constant_bool(false),
                    ta => {
                        let tb = truth(range(b, doms, w));
                        truth_interval(match (ta, tb) {
                            (_, Truth::False) => Truth::False,
                            (Truth::True, Truth::True) => Truth::True,
                            _ => Truth::Unknown,
                        })
                    }
                },
                BinOp::Or => match truth(ra) {
                    Truth::True => constant_bool(true),
                    ta => {
                        let tb = truth(range(b, doms, w));
                        truth_interval(match (ta, tb) {
                            (_, Truth::True) => Truth::True,
                            (Truth::False, Truth::False) => Truth::False,
                            _ => Truth::Unknown,
                        })
                    }
                },
                BinOp::Xor => {
                    let tb = truth(range(b, doms, w));
                    truth_interval(match (truth(ra), tb) {
                        (Truth::Unknown, _) | (_, Truth::Unknown) => Truth::Unknown,
                        (x, y) if x == y => Truth::False,
                        _ => Truth::True,
                    })
                }
                _ => {
                    let rb = range(b, doms, w);
                    let (al, ah, bl, bh) = (ra.lo as i128, ra.hi as i128, rb.lo as i128, rb.hi as i128);
                    match op {
                        BinOp::Add => fit(al + bl, ah + bh, w),
                        BinOp::Sub => fit(al - bh, ah - bl, w),
                        BinOp::Mul => {
                            let c = [al * bl, al * bh, ah * bl, ah * bh];
                            fit(*c.iter().min().unwrap(), *c.iter().max().unwrap(), w)
                        }
                        BinOp::Div => div_range(ra, rb, w),
                        BinOp::Rem => rem_range(ra, rb),
                        _ => relational_range(*op, ra, rb),
                    }
                }
            }
        }
        Node::Ite(c, a, b) => match truth(range(c, doms, w)) {
            Truth::True => range(a, doms, w),
            Truth::False => range(b, doms, w),
            Truth::Unknown => hull(range(a, doms, w), range(b, doms, w)),
        },
    }
}

fn negate_relational(op: BinOp) -> BinOp {
    match op {
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        other => other,
    }
}

/// Backward narrowing of variable domains. Every method returns `false`
/// once some domain becomes empty, i.e. the constraint has no solution in
/// the current box.
pub struct Narrower<'a> {
    pub doms: &'a mut [Interval],
    pub w: IntWidth,
    pub changed: bool,
}

impl<'a> Narrower<'a> {
    pub fn new(doms: &'a mut [Interval], w: IntWidth) -> Self {
        Narrower { doms, w, changed: false }
    }

    fn range(&self, t: &Term) -> Interval {
        range(t, self.doms, self.w)
    }

    fn span(lo: i128, hi: i128) -> Option<Interval> {
        let lo = lo.clamp(i64::MIN as i128 / 2, i64::MAX as i128 / 2) as i64;
        let hi = hi.clamp(i64::MIN as i128 / 2, i64::MAX as i128 / 2) as i64;
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    /// Restricts `t` to values in `target`.
    pub fn int(&mut self, t: &Term, target: Interval) -> bool {
        let cur = self.range(t);
        let Some(tgt) = intersect(cur, target) else { return false };
        let w = self.w;
        match t.node() {
            Node::Const(_) => true,
            Node::Var(v) => {
                let slot = &mut self.doms[v.0 as usize];
                if *slot != tgt {
                    *slot = tgt;
                    self.changed = true;
                }
                true
            }
            Node::Unary(UnOp::Neg, a) => {
                if self.range(a).lo == w.min() {
                    return true;
                }
                self.int(a, Interval::new(-tgt.hi, -tgt.lo))
            }
            Node::Unary(UnOp::Abs, a) => {
                let ra = self.range(a);
                if ra.lo == w.min() {
                    return true;
                }
                if !self.int(a, Interval::new(-tgt.hi.max(0), tgt.hi.max(0))) {
                    return false;
                }
                let ra = self.range(a);
                if tgt.lo > 0 && ra.lo >= 0 {
                    return self.int(a, Interval::new(tgt.lo, ra.hi.max(tgt.lo)));
                }
                if tgt.lo > 0 && ra.hi <= 0 {
                    return self.int(a, Interval::new(ra.lo.min(-tgt.lo), -tgt.lo));
                }
                true
            }
            Node::Unary(UnOp::Not, _) | Node::Binary(..) if t.is_boolean() => {
                if tgt.lo == tgt.hi {
                    self.truth(t, tgt.lo != 0)
                } else {
                    true
                }
            }
            Node::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
                let (ra, rb) = (self.range(a), self.range(b));
                let exact = |ra: Interval, rb: Interval| {
                    let (lo, hi) = if *op == BinOp::Add {
                        (ra.lo as i128 + rb.lo as i128, ra.hi as i128 + rb.hi as i128)
                    } else {
                        (ra.lo as i128 - rb.hi as i128, ra.hi as i128 - rb.lo as i128)
                    };
                    lo >= w.min() as i128 && hi <= w.max() as i128
                };
                if !exact(ra, rb) {
                    return true;
                }
                let (tl, th) = (tgt.lo as i128, tgt.hi as i128);
                let a_target = if *op == BinOp::Add {
                    Self::span(tl - rb.hi as i128, th - rb.lo as i128)
                } else {
                    Self::span(tl + rb.lo as i128, th + rb.hi as i128)
                };
                let Some(a_target) = a_target else { return false };
                if !self.int(a, a_target) {
                    return false;
                }
                let ra = self.range(a);
                let b_target = if *op == BinOp::Add {
                    Self::span(tl - ra.hi as i128, th - ra.lo as i128)
                } else {
                    Self::span(ra.lo as i128 - th, ra.hi as i128 - tl)
                };
                match b_target {
                    Some(bt) => self.int(b, bt),
                    None => false,
                }
            }
            Node::Binary(BinOp::Mul, a, b) => {
                let (x, c) = match (a.as_const(), b.as_const()) {
                    (Some(c), None) => (b, c),
                    (None, Some(c)) => (a, c),
                    _ => return true,
                };
                let rx = self.range(x);
                let prod = [rx.lo as i128 * c as i128, rx.hi as i128 * c as i128];
                if c == 0 || prod.iter().any(|p| *p < w.min() as i128 || *p > w.max() as i128) {
                    return true;
                }
                let (lo, hi) = if c > 0 {
                    (tgt.lo.div_euclid(c) + (tgt.lo.rem_euclid(c) != 0) as i64, tgt.hi.div_euclid(c))
                } else {
                    let c = -c;
                    (
                        (-tgt.hi).div_euclid(c) + ((-tgt.hi).rem_euclid(c) != 0) as i64,
                        (-tgt.lo).div_euclid(c),
                    )
                };
                if lo > hi {
                    return false;
                }
                self.int(x, Interval::new(lo, hi))
            }
            Node::Ite(c, a, b) => match truth(self.range(c)) {
                Truth::True => self.int(a, tgt),
                Truth::False => self.int(b, tgt),
                Truth::Unknown => {
                    if intersect(self.range(a), tgt).is_none() {
                        self.truth(c, false) && self.int(b, tgt)
                    } else if intersect(self.range(b), tgt).is_none() {
                        self.truth(c, true) && self.int(a, tgt)
                    } else {
                        true
                    }
                }
            },
            _ => true,
        }
    }

    /// Restricts `t` to be truthy (`want`) or zero (`!want`).
    pub fn truth(&mut self, t: &Term, want: bool) -> bool {
        match truth(self.range(t)) {
            Truth::True => return want,
            Truth::False => return !want,
            Truth::Unknown => {}
        }
        match t.node() {
            Node::Binary(op, a, b) if op.is_relational() => {
                let op = if want { *op } else { negate_relational(*op) };
                self.relation(op, a, b)
            }
            Node::Binary(BinOp::And, a, b) => {
                if want {
                    self.truth(a, true) && self.truth(b, true)
                } else {
                    match (truth(self.range(a)), truth(self.range(b))) {
                        (Truth::True, _) => self.truth(b, false),
                        (_, Truth::True) => self.truth(a, false),
                        _ => true,
                    }
                }
            }
            Node::Binary(BinOp::Or, a, b) => {
                if !want {
                    self.truth(a, false) && self.truth(b, false)
                } else {
                    match (truth(self.range(a)), truth(self.range(b))) {
                        (Truth::False, _) => self.truth(b, true),
                        (_, Truth::False) => self.truth(a, true),
                        _ => true,
                    }
                }
            }
            Node::Binary(BinOp::Xor, a, b) => match (truth(self.range(a)), truth(self.range(b))) {
                (Truth::Unknown, Truth::Unknown) => true,
                (Truth::Unknown, tb) => self.truth(a, want != (tb == Truth::True)),
                (ta, _) => self.truth(b, want != (ta == Truth::True)),
            },
            Node::Unary(UnOp::Not, a) => self.truth(a, !want),
            _ => {
                if !want {
                    return self.int(t, Interval::new(0, 0));
                }
                let r = self.range(t);
                if r.lo == 0 {
                    self.int(t, Interval::new(1, r.hi))
                } else if r.hi == 0 {
                    self.int(t, Interval::new(r.lo, -1))
                } else {
                    true
                }
            }
        }
    }

    fn relation(&mut self, op: BinOp, a: &Term, b: &Term) -> bool {
        let (min, max) = (self.w.min(), self.w.max());
        match op {
            BinOp::Gt => self.relation(BinOp::Lt, b, a),
            BinOp::Ge => self.relation(BinOp::Le, b, a),
            BinOp::Lt | BinOp::Le => {
                let strict = (op == BinOp::Lt) as i64;
                let rb = self.range(b);
                if rb.hi - strict < min || !self.int(a, Interval::new(min, rb.hi - strict)) {
                    return false;
                }
                let ra = self.range(a);
                if ra.lo + strict > max {
                    return false;
                }
                self.int(b, Interval::new(ra.lo + strict, max))
            }
            BinOp::Eq => {
                let rb = self.range(b);
                if !self.int(a, rb) {
                    return false;
                }
                let ra = self.range(a);
                self.int(b, ra)
            }
            BinOp::Ne => {
                let (ra, rb) = (self.range(a), self.range(b));
                if rb.lo == rb.hi {
                    if !self.exclude(a, ra, rb.lo) {
                        return false;
                    }
                } else if ra.lo == ra.hi {
                    return self.exclude(b, rb, ra.lo);
                }
                true
            }
            _ => true,
        }
    }

    fn exclude(&mut self, t: &Term, r: Interval, c: i64) -> bool {
        if r.lo == c && r.hi == c {
            false
        } else if r.lo == c {
            self.int(t, Interval::new(c + 1, r.hi))
        } else if r.hi == c {
            self.int(t, Interval::new(r.lo, c - 1))
        } else {
            true
        }
    }
}

/// Narrows `doms` to a fixpoint (bounded rounds) under all `constraints`.
/// Returns `false` when the box is proven empty.
pub fn propagate(constraints: &[Term], doms: &mut [Interval], w: IntWidth) -> bool {
    for _ in 0..32 {
        let mut n = Narrower::new(doms, w);
        for c in constraints {
            if !n.truth(c, true) {
                return false;
            }
        }
        if !n.changed {
            break;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::term::VarId;

    const W: IntWidth = IntWidth::DEFAULT;

    fn x() -> Term {
        Term::var(VarId(0))
    }

    #[test]
    fn forward_ranges() {
        let doms = [Interval::new(-3, 5)];
        let t = Term::binary(BinOp::Mul, x(), x(), W);
        assert_eq!(range(&t, &doms, W), Interval::new(-15, 25));
        let t = Term::unary(UnOp::Abs, x(), W);
        assert_eq!(range(&t, &doms, W), Interval::new(0, 5));
        let t = Term::binary(BinOp::Rem, x(), Term::constant(2), W);
        assert_eq!(range(&t, &doms, W), Interval::new(-1, 1));
    }

    #[test]
    fn wrap_widens_to_full_range() {
        let doms = [Interval::new(W.max() - 1, W.max())];
        let t = Term::binary(BinOp::Add, x(), Term::constant(5), W);
        assert_eq!(range(&t, &doms, W), full(W));
    }

    #[test]
    fn narrowing_relations() {
        let y = Term::var(VarId(1));
        let sum_big = Term::binary(BinOp::Gt, Term::binary(BinOp::Add, x(), y.clone(), W), Term::constant(150), W);
        let mut doms = [Interval::new(-100, 100), Interval::new(-100, 100)];
        assert!(propagate(&[sum_big.clone()], &mut doms, W));
        assert_eq!(doms, [Interval::new(51, 100), Interval::new(51, 100)]);

        let small = Term::binary(BinOp::Lt, x(), Term::constant(3), W);
        let mut doms = [Interval::new(-100, 100), Interval::new(-100, 100)];
        assert!(!propagate(&[small, sum_big], &mut doms, W));
    }

    #[test]
    fn narrowing_disequality_and_scaling() {
        let mut doms = [Interval::new(0, 10)];
        let ne = Term::binary(BinOp::Ne, x(), Term::constant(0), W);
        let scaled = Term::binary(BinOp::Le, Term::binary(BinOp::Mul, Term::constant(3), x(), W), Term::constant(20), W);
        assert!(propagate(&[ne, scaled], &mut doms, W));
        assert_eq!(doms[0], Interval::new(1, 6));
    }
}
