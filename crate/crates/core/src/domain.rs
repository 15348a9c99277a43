//! Exhaustive enumeration of a program's declared input domain.

use crate::frontend::Program;
use crate::semantics::TestInput;
use crate::solver::{Model, VarTable};

/// Models in lexicographic order over [`VarTable`] variables.
pub struct Models {
    lo: Vec<i64>,
    hi: Vec<i64>,
    next: Option<Model>,
}

impl Iterator for Models {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        while i > 0 {
            i -= 1;
            if succ[i] < self.hi[i] {
                succ[i] += 1;
                succ[i + 1..].copy_from_slice(&self.lo[i + 1..]);
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

pub fn models(table: &VarTable) -> Models {
    let lo: Vec<i64> = table.vars.iter().map(|v| v.domain.lo).collect();
    let hi: Vec<i64> = table.vars.iter().map(|v| v.domain.hi).collect();
    let empty = lo.iter().zip(&hi).any(|(l, h)| l > h);
    Models { next: (!empty).then(|| lo.clone()), lo, hi }
}

/// Every input of `p`'s declared domain, in lexicographic order.
pub fn inputs(p: &Program) -> impl Iterator<Item = TestInput> {
    let table = VarTable::from_program(p);
    models(&table).map(move |m| table.model_to_input(&m))
}
