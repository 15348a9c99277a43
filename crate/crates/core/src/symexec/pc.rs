//! Structured program counter shared by the concrete and symbolic machines.
//!
//! A frame is a block plus the index of the next statement in it. Taking a
//! branch advances the parent before entering the branch; entering a loop
//! body leaves the parent on the loop, so popping the body frame re-tests
//! the loop condition.

use crate::frontend::ast::{Stmt, StmtKind};

#[derive(Debug, Clone)]
pub struct Pc<'p> {
    frames: Vec<(&'p [Stmt], usize)>,
}

impl<'p> Pc<'p> {
    pub fn new(body: &'p [Stmt]) -> Self {
        Pc { frames: vec![(body, 0)] }
    }

    /// Next statement to execute, skipping label pragmas; `None` once
    /// control falls off the end of the program.
    pub fn current(&mut self) -> Option<&'p Stmt> {
        loop {
            let (block, idx) = *self.frames.last()?;
            match block.get(idx) {
                None => {
                    self.frames.pop();
                }
                Some(s) if matches!(s.kind, StmtKind::LabelPragma(_)) => self.advance(),
                Some(s) => return Some(s),
            }
        }
    }

    /// Moves past the current statement.
    pub fn advance(&mut self) {
        if let Some(top) = self.frames.last_mut() {
            top.1 += 1;
        }
    }

    /// Enters `block`; the current statement is left in place (loops).
    pub fn enter(&mut self, block: &'p [Stmt]) {
        self.frames.push((block, 0));
    }

    /// Moves past the current statement and enters `block` (branches).
    pub fn branch(&mut self, block: &'p [Stmt]) {
        self.advance();
        self.enter(block);
    }

    /// Identity of the control position, for memoization.
    pub fn key(&self) -> Vec<(usize, usize)> {
        self.frames.iter().map(|(b, i)| (b.as_ptr() as usize, *i)).collect()
    }
}
