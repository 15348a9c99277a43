//! Lexer and recursive-descent parser for `.lbl` sources.
//!
//! A source is either a full entry function (`fn name(params) { ... }`) or a
//! bare statement list. In the latter case every free scalar variable becomes
//! an implicit `int` parameter with the default domain, in order of first use.

use std::collections::BTreeSet;

use super::ast::*;
use super::check;
use super::FrontendError;
use crate::semantics::{IntWidth, Interval};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Fn,
    KwInt,
    In,
    Let,
    If,
    Else,
    While,
    Return,
    Abs,
    True,
    False,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AndAnd,
    OrOr,
    Caret,
    Bang,
    PlusPlus,
    MinusMinus,
    Pragma,
    PragmaEnd,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Pragma => "`//@label`".into(),
            Tok::PragmaEnd => "end of label pragma".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", token_text(other)),
        }
    }
}

fn token_text(t: &Tok) -> &'static str {
    match t {
        Tok::Fn => "fn",
        Tok::KwInt => "int",
        Tok::In => "in",
        Tok::Let => "let",
        Tok::If => "if",
        Tok::Else => "else",
        Tok::While => "while",
        Tok::Return => "return",
        Tok::Abs => "abs",
        Tok::True => "true",
        Tok::False => "false",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::Semi => ";",
        Tok::Assign => "=",
        Tok::EqEq => "==",
        Tok::NotEq => "!=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::AndAnd => "&&",
        Tok::OrOr => "||",
        Tok::Caret => "^",
        Tok::Bang => "!",
        Tok::PlusPlus => "++",
        Tok::MinusMinus => "--",
        _ => "?",
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Spanned>, FrontendError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut in_pragma = false;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |tok: Tok, out: &mut Vec<Spanned>| out.push(Spanned { tok, line: tl, col: tc });
        if c == '\n' {
            if in_pragma {
                push(Tok::PragmaEnd, &mut out);
                in_pragma = false;
            }
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            let rest: String = chars[i..].iter().take(8).collect();
            if rest == "//@label" && !in_pragma {
                push(Tok::Pragma, &mut out);
                in_pragma = true;
                i += 8;
                col += 8;
                continue;
            }
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| FrontendError::Syntax {
                line: tl,
                col: tc,
                message: format!("integer literal `{text}` is too large"),
            })?;
            col += (i - start) as u32;
            push(Tok::Int(v), &mut out);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let tok = match text.as_str() {
                "fn" => Tok::Fn,
                "int" => Tok::KwInt,
                "in" => Tok::In,
                "let" => Tok::Let,
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                "return" => Tok::Return,
                "abs" => Tok::Abs,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(text),
            };
            push(tok, &mut out);
            continue;
        }
        let two: String = chars[i..].iter().take(2).collect();
        let tok2 = match two.as_str() {
            "==" => Some(Tok::EqEq),
            "!=" => Some(Tok::NotEq),
            "<=" => Some(Tok::Le),
            ">=" => Some(Tok::Ge),
            "&&" => Some(Tok::AndAnd),
            "||" => Some(Tok::OrOr),
            "++" => Some(Tok::PlusPlus),
            "--" => Some(Tok::MinusMinus),
            _ => None,
        };
        if let Some(t) = tok2 {
            push(t, &mut out);
            i += 2;
            col += 2;
            continue;
        }
        let tok1 = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '=' => Tok::Assign,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '^' => Tok::Caret,
            '!' => Tok::Bang,
            _ => {
                return Err(FrontendError::Syntax { line: tl, col: tc, message: format!("unexpected character `{c}`") })
            }
        };
        push(tok1, &mut out);
        i += 1;
        col += 1;
    }
    if in_pragma {
        out.push(Spanned { tok: Tok::PragmaEnd, line, col });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Parser knobs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept `__`-prefixed identifiers (normalization temporaries).
    pub allow_reserved: bool,
    /// Integer width; defaults to 16 bits.
    pub width: Option<IntWidth>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    opts: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FrontendError> {
        let (line, col) = self.here();
        Err(FrontendError::Syntax { line, col, message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, FrontendError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FrontendError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{}`", token_text(&tok)))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                if name.starts_with("__") && !self.opts.allow_reserved {
                    return self.error(format!("identifier `{name}` uses the reserved `__` prefix"));
                }
                self.bump();
                Ok(name)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn signed_int(&mut self) -> Result<i64, FrontendError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                self.unexpected("integer")
            }
        }
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        let width = self.opts.width.unwrap_or_default();
        if *self.peek() != Tok::Fn {
            let body = self.stmts_until(&Tok::Eof)?;
            self.expect(Tok::Eof)?;
            return Ok(Program { name: "main".into(), params: Vec::new(), body, width });
        }
        self.bump();
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.param()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok(Program { name, params, body, width })
    }

    fn param(&mut self) -> Result<Param, FrontendError> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        self.expect(Tok::KwInt)?;
        let mut ty = ParamType::Int;
        if *self.peek() == Tok::LBracket {
            self.bump();
            let n = match self.bump() {
                Tok::Int(n) if n > 0 => n as usize,
                _ => {
                    self.pos -= 1;
                    return self.error("array size must be a positive integer");
                }
            };
            self.expect(Tok::RBracket)?;
            ty = ParamType::Array(n);
        }
        let mut domain = Interval::DEFAULT_DOMAIN;
        if *self.peek() == Tok::In {
            self.bump();
            self.expect(Tok::LBracket)?;
            let lo = self.signed_int()?;
            self.expect(Tok::Comma)?;
            let hi = self.signed_int()?;
            self.expect(Tok::RBracket)?;
            if lo > hi {
                return self.error(format!("empty domain [{lo}, {hi}]"));
            }
            domain = Interval::new(lo, hi);
        }
        Ok(Param { name, ty, domain })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.expect(Tok::LBrace)?;
        let body = self.stmts_until(&Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        Ok(body)
    }

    fn stmts_until(&mut self, end: &Tok) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::new();
        while self.peek() != end && *self.peek() != Tok::Eof {
            if *self.peek() == Tok::Pragma {
                let (line, _) = self.here();
                self.bump();
                let pred = self.expr()?;
                if *self.peek() != Tok::PragmaEnd {
                    return self.unexpected("end of line after label predicate");
                }
                self.bump();
                if self.peek() == end || *self.peek() == Tok::Eof || *self.peek() == Tok::RBrace {
                    return self.error("label pragma must be followed by a statement");
                }
                out.push(Stmt { loc: LocationId(0), line, kind: StmtKind::LabelPragma(pred) });
                continue;
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let (line, _) = self.here();
        let kind = match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let name = self.ident()?;
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    let size = match self.bump() {
                        Tok::Int(n) if n > 0 => n as usize,
                        _ => {
                            self.pos -= 1;
                            return self.error("array size must be a positive integer");
                        }
                    };
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Semi)?;
                    StmtKind::ArrayDecl { name, size }
                } else {
                    self.expect(Tok::Assign)?;
                    let init = self.expr()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Decl { name, init }
                }
            }
            Tok::If => return self.if_stmt(),
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Return(e)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let lhs = if *self.peek() == Tok::LBracket {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    Lvalue::Index(name, idx)
                } else {
                    Lvalue::Var(name)
                };
                self.expect(Tok::Assign)?;
                let rhs = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { lhs, rhs }
            }
            _ => return self.unexpected("statement"),
        };
        Ok(Stmt { loc: LocationId(0), line, kind })
    }

    fn if_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let (line, _) = self.here();
        self.expect(Tok::If)?;
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then_block = self.block()?;
        let else_block = if *self.peek() == Tok::Else {
            self.bump();
            if *self.peek() == Tok::If {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt { loc: LocationId(0), line, kind: StmtKind::If { cond, then_block, else_block } })
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::Caret => BinOp::Xor,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                if let Tok::Int(v) = *self.peek() {
                    // `-5` is a literal unless it is the operand of a postfix form.
                    self.bump();
                    return Ok(Expr::Int(-v));
                }
                Ok(Expr::unary(UnOp::Neg, self.unary()?))
            }
            Tok::Bang => {
                self.bump();
                Ok(Expr::unary(UnOp::Not, self.unary()?))
            }
            Tok::Abs => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::unary(UnOp::Abs, e))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                match self.peek() {
                    Tok::PlusPlus => {
                        self.bump();
                        Ok(Expr::PostInc(name))
                    }
                    Tok::MinusMinus => {
                        self.bump();
                        Ok(Expr::PostDec(name))
                    }
                    Tok::LBracket => {
                        self.bump();
                        let idx = self.expr()?;
                        self.expect(Tok::RBracket)?;
                        Ok(Expr::Index(name, Box::new(idx)))
                    }
                    _ => Ok(Expr::Var(name)),
                }
            }
            _ => self.unexpected("expression"),
        }
    }
}

/// Parses and type-checks a program, assigning dense location ids.
pub fn parse_with(source: &str, opts: ParseOptions) -> Result<Program, FrontendError> {
    let toks = lex(source)?;
    let mut parser = Parser { toks, pos: 0, opts };
    let snippet = *parser.peek() != Tok::Fn;
    let mut program = parser.program()?;
    if snippet {
        program.params = implicit_params(&program);
    }
    program.renumber();
    check::check_program(&program, opts.allow_reserved)?;
    Ok(program)
}

pub fn parse(source: &str) -> Result<Program, FrontendError> {
    parse_with(source, ParseOptions::default())
}

/// Parses a standalone expression (label predicates, partitions).
pub fn parse_expr(source: &str, allow_reserved: bool) -> Result<Expr, FrontendError> {
    let toks = lex(source)?;
    let mut parser = Parser { toks, pos: 0, opts: ParseOptions { allow_reserved, width: None } };
    let e = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return parser.unexpected("end of expression");
    }
    Ok(e)
}

fn implicit_params(program: &Program) -> Vec<Param> {
    let mut declared = BTreeSet::new();
    let mut params: Vec<Param> = Vec::new();
    let note = |name: &str, declared: &BTreeSet<String>, params: &mut Vec<Param>| {
        if !declared.contains(name) && !params.iter().any(|p| p.name == name) {
            params.push(Param { name: name.to_string(), ty: ParamType::Int, domain: Interval::DEFAULT_DOMAIN });
        }
    };
    program.walk(&mut |s| {
        let mut names: Vec<(String, bool)> = Vec::new();
        let mut grab = |e: &Expr| e.visit_names(&mut |n, is_array| names.push((n.to_string(), is_array)));
        match &s.kind {
            StmtKind::Decl { init, .. } => grab(init),
            StmtKind::Assign { lhs, rhs } => {
                grab(rhs);
                grab(&lhs.as_expr());
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => grab(cond),
            StmtKind::Return(e) | StmtKind::LabelPragma(e) => grab(e),
            _ => {}
        }
        for (n, is_array) in names {
            if !is_array {
                note(&n, &declared, &mut params);
            }
        }
        match &s.kind {
            StmtKind::Decl { name, .. } | StmtKind::ArrayDecl { name, .. } => {
                declared.insert(name.clone());
            }
            _ => {}
        }
    });
    params
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snippet_with_compound_condition() {
        let p = parse("if (x==y && a<b) { r = 1; }").unwrap();
        assert_eq!(p.body.len(), 1);
        let names: Vec<_> = p.params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["x", "y", "a", "b", "r"]);
        match &p.body[0].kind {
            StmtKind::If { cond, .. } => {
                let atoms = crate::frontend::atomic_conditions(cond);
                assert_eq!(atoms.len(), 2);
            }
            other => panic!("expected if, got {other:?}"),
        }
    }

    #[test]
    fn empty_source_is_empty_program() {
        let p = parse("").unwrap();
        assert!(p.body.is_empty());
        assert!(p.params.is_empty());
    }

    #[test]
    fn dangling_operator_is_syntax_error() {
        match parse("x = 1 +;") {
            Err(FrontendError::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 8)),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reserved_forms_are_rejected() {
        assert!(parse("fn f(x: int) { if (__nondet) { x = 1; } }").is_err());
        assert!(parse("fn f(x: int) { __exit = 1; }").is_err());
        assert!(parse("fn f(x: int) { let __tmp0 = 1; }").is_err());
    }

    #[test]
    fn precedence_and_literals() {
        let e = parse_expr("a + b * -3 < c ^ d == 0 && !e || f", false).unwrap();
        let printed = crate::frontend::printer::expr_to_string(&e);
        assert_eq!(printed, "a + b * -3 < c ^ d == 0 && !e || f");
        match e {
            Expr::Binary(BinOp::Or, _, _) => {}
            other => panic!("|| should be outermost: {other:?}"),
        }
    }

    #[test]
    fn pragma_must_precede_statement() {
        assert!(parse("fn f(x: int) { x = 1;\n //@label x > 0\n }").is_err());
        let p = parse("fn f(x: int) {\n  //@label x > 0\n  x = 1;\n}").unwrap();
        assert!(matches!(p.body[0].kind, StmtKind::LabelPragma(_)));
        assert_eq!(p.body[1].loc, LocationId(1));
    }

    #[test]
    fn array_params_and_domains() {
        let p = parse("fn f(s: int[3] in [0, 255], n: int in [-4, 4]) { let buf[2]; buf[0] = s[n]; }").unwrap();
        assert_eq!(p.params[0].ty, ParamType::Array(3));
        assert_eq!(p.params[0].domain, Interval::new(0, 255));
        assert_eq!(p.params[1].domain, Interval::new(-4, 4));
    }
}
