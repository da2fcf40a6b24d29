use super::ast::{BinOp, Expr, Input, Program, Stmt, UnOp};
use super::check::Checker;
use super::lexer::{tokenize, Token};
use super::{ParseError, ParseErrorKind, Pos};
use crate::value::{Domain, Type};

/// Parses and validates a complete program.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(source)?;
    let program = p.program()?;
    p.expect(Token::Eof)?;
    let end = p.pos();
    Checker::with_positions(&p.positions, end).program(&program)?;
    Ok(program)
}

/// Parses a standalone expression without type checking.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.expect(Token::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<(Token, Pos)>,
    idx: usize,
    /// Start position of every `Expr` and `Stmt` node, in post-order. The
    /// checker walks the tree in the same order to recover positions.
    positions: Vec<Pos>,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(source)?,
            idx: 0,
            positions: Vec::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Token, Pos) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error<T>(&self, msg: String) -> Result<T, ParseError> {
        Err(ParseError {
            pos: Some(self.pos()),
            kind: ParseErrorKind::Syntax(msg),
        })
    }

    fn expect(&mut self, tok: Token) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Token::Ident(n) => {
                let pos = self.bump().1;
                Ok((n, pos))
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Token::Minus);
        match *self.peek() {
            Token::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            ref other => self.error(format!("expected integer, found {other}")),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.expect(Token::Program)?;
        let (name, _) = self.ident()?;
        self.expect(Token::LParen)?;
        let mut inputs: Vec<Input> = Vec::new();
        loop {
            let (pname, ppos) = self.ident()?;
            if inputs.iter().any(|i| i.name == pname) {
                return Err(ParseError {
                    pos: Some(ppos),
                    kind: ParseErrorKind::DuplicateInput(pname),
                });
            }
            self.expect(Token::Colon)?;
            let domain = match self.peek() {
                Token::BoolKw => {
                    self.bump();
                    Domain::Bool
                }
                Token::IntKw => {
                    self.bump();
                    if *self.peek() != Token::LBracket {
                        return Err(ParseError {
                            pos: Some(ppos),
                            kind: ParseErrorKind::UnboundedDomain(pname),
                        });
                    }
                    self.bump();
                    let lo = self.signed_int()?;
                    self.expect(Token::DotDot)?;
                    let hi = self.signed_int()?;
                    self.expect(Token::RBracket)?;
                    if lo > hi {
                        return Err(ParseError {
                            pos: Some(ppos),
                            kind: ParseErrorKind::EmptyDomain { name: pname, lo, hi },
                        });
                    }
                    Domain::Int { lo, hi }
                }
                other => return self.error(format!("expected `int[..]` or `bool`, found {other}")),
            };
            inputs.push(Input::new(pname, domain));
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        self.expect(Token::RParen)?;
        self.expect(Token::Arrow)?;
        let output = match self.peek() {
            Token::IntKw => Type::Int,
            Token::BoolKw => Type::Bool,
            other => return self.error(format!("expected `int` or `bool`, found {other}")),
        };
        self.bump();
        let precondition = if self.eat(&Token::Requires) {
            let e = self.expr()?;
            self.expect(Token::Semi)?;
            e
        } else {
            Expr::Bool(true)
        };
        let body = self.block()?;
        Ok(Program {
            name,
            inputs,
            output,
            precondition,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Token::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Token::RBrace {
            if *self.peek() == Token::Eof {
                return self.error("unterminated block, expected `}`".into());
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.pos();
        let stmt = match self.peek().clone() {
            Token::Var => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Token::Assign)?;
                let init = self.expr()?;
                self.expect(Token::Semi)?;
                Stmt::Var { name, init }
            }
            Token::Ident(name) => {
                self.bump();
                self.expect(Token::Assign)?;
                let value = self.expr()?;
                self.expect(Token::Semi)?;
                Stmt::Assign { name, value }
            }
            Token::If => return self.if_stmt(),
            Token::While => {
                self.bump();
                self.expect(Token::LParen)?;
                let cond = self.expr()?;
                self.expect(Token::RParen)?;
                let body = self.block()?;
                Stmt::While { cond, body }
            }
            Token::Return => {
                self.bump();
                let e = self.expr()?;
                self.expect(Token::Semi)?;
                Stmt::Return(e)
            }
            other => return self.error(format!("expected a statement, found {other}")),
        };
        self.positions.push(start);
        Ok(stmt)
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.expect(Token::If)?;
        self.expect(Token::LParen)?;
        let cond = self.expr()?;
        self.expect(Token::RParen)?;
        let then_block = self.block()?;
        let else_block = if self.eat(&Token::Else) {
            if *self.peek() == Token::If {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        self.positions.push(start);
        Ok(Stmt::If {
            cond,
            then_block,
            else_block,
        })
    }

    pub(super) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Token::OrOr => BinOp::Or,
            Token::AndAnd => BinOp::And,
            Token::EqEq => BinOp::Eq,
            Token::NotEq => BinOp::Ne,
            Token::Lt => BinOp::Lt,
            Token::Le => BinOp::Le,
            Token::Gt => BinOp::Gt,
            Token::Ge => BinOp::Ge,
            Token::Plus => BinOp::Add,
            Token::Minus => BinOp::Sub,
            Token::Star => BinOp::Mul,
            Token::Slash => BinOp::Div,
            Token::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let op_pos = self.bump().1;
            let rhs = self.binary(prec + 1)?;
            self.positions.push(op_pos);
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos();
        let op = match self.peek() {
            Token::Minus => UnOp::Neg,
            Token::Bang => UnOp::Not,
            _ => return self.primary(),
        };
        self.bump();
        let operand = self.unary()?;
        self.positions.push(start);
        Ok(Expr::Unary(op, Box::new(operand)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        let e = match tok {
            Token::Int(n) => Expr::Int(n),
            Token::True => Expr::Bool(true),
            Token::False => Expr::Bool(false),
            Token::Ident(n) => Expr::Var(n),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                return Ok(e);
            }
            other => {
                return Err(ParseError {
                    pos: Some(pos),
                    kind: ParseErrorKind::Syntax(format!("expected an expression, found {other}")),
                })
            }
        };
        self.positions.push(pos);
        Ok(e)
    }
}
