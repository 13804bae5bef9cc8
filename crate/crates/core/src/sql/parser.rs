use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::SqlError;

/// Which FROM-clause forms are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grammar {
    /// Input queries: comma-separated base tables only.
    Subset,
    /// Emitted SQL: additionally derived tables and explicit joins.
    Extended,
}

pub fn parse_select(sql: &str, grammar: Grammar) -> Result<Select, SqlError> {
    let tokens = tokenize(sql)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        grammar,
        end: sql.len(),
    };
    let select = parser.select()?;
    parser.eat(&TokenKind::Semicolon);
    if let Some(tok) = parser.peek() {
        return Err(parser.unsupported_at(tok));
    }
    Ok(select)
}

/// Parses a standalone expression (used for tests and predicate fixtures).
pub fn parse_expr(sql: &str) -> Result<Expr, SqlError> {
    let tokens = tokenize(sql)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        grammar: Grammar::Subset,
        end: sql.len(),
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(SqlError::new("unexpected trailing input", tok.offset));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    grammar: Grammar,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), SqlError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.expected(kw))
        }
    }

    fn expected(&self, what: &str) -> SqlError {
        match self.peek() {
            Some(tok) => SqlError::new(format!("expected {what}, found {}", describe(tok)), tok.offset),
            None => SqlError::new(format!("expected {what}, found end of input"), self.end),
        }
    }

    fn unsupported_at(&self, tok: &Token) -> SqlError {
        SqlError::new(format!("unsupported syntax at {}", describe(tok)), tok.offset)
    }

    fn ident(&mut self, what: &str) -> Result<String, SqlError> {
        match self.peek_kind() {
            Some(TokenKind::Word(w)) if !is_reserved(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            Some(TokenKind::QuotedIdent(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.expected(what)),
        }
    }

    fn select(&mut self) -> Result<Select, SqlError> {
        self.expect_keyword("SELECT")?;
        if self.at_keyword("DISTINCT") {
            return Err(self.unsupported_at(&self.peek().unwrap().clone()));
        }
        let mut items = vec![self.select_item()?];
        while self.eat(&TokenKind::Comma) {
            items.push(self.select_item()?);
        }
        self.expect_keyword("FROM")?;
        let mut from = vec![self.join_tree()?];
        while self.eat(&TokenKind::Comma) {
            from.push(self.join_tree()?);
        }
        let selection = if self.eat_keyword("WHERE") {
            Some(self.expr()?)
        } else {
            None
        };
        for kw in ["GROUP", "ORDER", "HAVING", "LIMIT", "UNION"] {
            if self.at_keyword(kw) {
                return Err(self.unsupported_at(&self.peek().unwrap().clone()));
            }
        }
        Ok(Select {
            items,
            from,
            selection,
        })
    }

    /// `AS name`, or a bare identifier that is not a keyword.
    fn optional_alias(&mut self, what: &str) -> Result<Option<String>, SqlError> {
        let bare = matches!(self.peek_kind(), Some(TokenKind::Word(w)) if !is_reserved(w))
            || matches!(self.peek_kind(), Some(TokenKind::QuotedIdent(_)));
        if self.eat_keyword("AS") || bare {
            Ok(Some(self.ident(what)?))
        } else {
            Ok(None)
        }
    }

    fn select_item(&mut self) -> Result<SelectItem, SqlError> {
        if self.eat(&TokenKind::Star) {
            return Ok(SelectItem::Wildcard);
        }
        let expr = self.expr()?;
        let alias = self.optional_alias("output name")?;
        Ok(SelectItem::Expr { expr, alias })
    }

    fn join_tree(&mut self) -> Result<FromItem, SqlError> {
        let factor = self.table_factor()?;
        let mut joins = Vec::new();
        loop {
            let start = self.peek().cloned();
            let constraint_kind = if self.eat_keyword("CROSS") {
                self.expect_keyword("JOIN")?;
                Some(false)
            } else if self.eat_keyword("INNER") {
                self.expect_keyword("JOIN")?;
                Some(true)
            } else if self.eat_keyword("JOIN") {
                Some(true)
            } else {
                None
            };
            let Some(has_on) = constraint_kind else { break };
            if self.grammar == Grammar::Subset {
                return Err(self.unsupported_at(&start.unwrap()));
            }
            let factor = self.table_factor()?;
            let constraint = if has_on {
                self.expect_keyword("ON")?;
                JoinConstraint::On(self.expr()?)
            } else {
                JoinConstraint::Cross
            };
            joins.push(Join { factor, constraint });
        }
        for kw in ["LEFT", "RIGHT", "FULL", "NATURAL"] {
            if self.at_keyword(kw) {
                return Err(self.unsupported_at(&self.peek().unwrap().clone()));
            }
        }
        Ok(FromItem { factor, joins })
    }

    fn table_factor(&mut self) -> Result<TableFactor, SqlError> {
        if let Some(tok) = self.peek().cloned() {
            if tok.kind == TokenKind::LParen {
                if self.grammar == Grammar::Subset {
                    return Err(self.unsupported_at(&tok));
                }
                self.pos += 1;
                let subquery = self.select()?;
                self.expect(TokenKind::RParen, "`)`")?;
                self.eat_keyword("AS");
                let alias = self.ident("derived table alias")?;
                return Ok(TableFactor::Derived {
                    subquery: Box::new(subquery),
                    alias,
                });
            }
        }
        let name = self.ident("table name")?;
        if self.peek_kind() == Some(&TokenKind::Dot) {
            return Err(self.unsupported_at(&self.peek().unwrap().clone()));
        }
        let alias = self.optional_alias("table alias")?;
        Ok(TableFactor::Table { name, alias })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.and_expr()?;
        while self.eat_keyword("OR") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.not_expr()?;
        while self.eat_keyword("AND") {
            let right = self.not_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, SqlError> {
        if self.eat_keyword("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.predicate()
    }

    fn predicate(&mut self) -> Result<Expr, SqlError> {
        let left = self.primary()?;
        let op = match self.peek_kind() {
            Some(TokenKind::Eq) => Some(CmpOp::Eq),
            Some(TokenKind::NotEq) => Some(CmpOp::NotEq),
            Some(TokenKind::Lt) => Some(CmpOp::Lt),
            Some(TokenKind::LtEq) => Some(CmpOp::LtEq),
            Some(TokenKind::Gt) => Some(CmpOp::Gt),
            Some(TokenKind::GtEq) => Some(CmpOp::GtEq),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let right = self.primary()?;
            return Ok(Expr::Compare {
                left: Box::new(left),
                op,
                right: Box::new(right),
            });
        }
        if self.eat_keyword("IS") {
            let negated = self.eat_keyword("NOT");
            self.expect_keyword("NULL")?;
            return Ok(Expr::IsNull {
                expr: Box::new(left),
                negated,
            });
        }
        let negated = self.eat_keyword("NOT");
        if self.eat_keyword("IN") {
            self.expect(TokenKind::LParen, "`(`")?;
            if self.at_keyword("SELECT") {
                return Err(self.unsupported_at(&self.peek().unwrap().clone()));
            }
            let mut list = vec![self.primary()?];
            while self.eat(&TokenKind::Comma) {
                list.push(self.primary()?);
            }
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(Expr::InList {
                expr: Box::new(left),
                list,
                negated,
            });
        }
        if self.eat_keyword("BETWEEN") {
            let low = self.primary()?;
            self.expect_keyword("AND")?;
            let high = self.primary()?;
            return Ok(Expr::Between {
                expr: Box::new(left),
                low: Box::new(low),
                high: Box::new(high),
                negated,
            });
        }
        if self.eat_keyword("LIKE") {
            let pattern = self.primary()?;
            return Ok(Expr::Like {
                expr: Box::new(left),
                pattern: Box::new(pattern),
                negated,
            });
        }
        if negated {
            return Err(self.expected("IN, BETWEEN or LIKE after NOT"));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Expr, SqlError> {
        let Some(tok) = self.next() else {
            return Err(SqlError::new("expected expression, found end of input", self.end));
        };
        match tok.kind {
            TokenKind::Number(n) => Ok(Expr::Literal(number_literal(&n, tok.offset)?)),
            TokenKind::Str(s) => Ok(Expr::Literal(Literal::Str(s))),
            TokenKind::Minus => match self.primary()? {
                Expr::Literal(Literal::Int(v)) => Ok(Expr::Literal(Literal::Int(-v))),
                Expr::Literal(Literal::Decimal(d)) => Ok(Expr::Literal(Literal::Decimal(format!("-{d}")))),
                other => Ok(Expr::Neg(Box::new(other))),
            },
            TokenKind::LParen => {
                if self.at_keyword("SELECT") {
                    return Err(self.unsupported_at(&self.peek().unwrap().clone()));
                }
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Word(ref w) if w.eq_ignore_ascii_case("NULL") => {
                Ok(Expr::Literal(Literal::Null))
            }
            TokenKind::Word(ref w) if is_reserved(w) => {
                self.pos -= 1;
                Err(self.expected("expression"))
            }
            TokenKind::Word(w) | TokenKind::QuotedIdent(w) => {
                if self.eat(&TokenKind::LParen) {
                    return self.function_call(w);
                }
                if self.eat(&TokenKind::Dot) {
                    let name = self.ident("column name")?;
                    return Ok(Expr::Column(ColumnRef::qualified(w, name)));
                }
                Ok(Expr::Column(ColumnRef::bare(w)))
            }
            _ => {
                self.pos -= 1;
                Err(self.expected("expression"))
            }
        }
    }

    fn function_call(&mut self, name: String) -> Result<Expr, SqlError> {
        let name = name.to_ascii_uppercase();
        let distinct = self.eat_keyword("DISTINCT");
        let mut args = Vec::new();
        if self.eat(&TokenKind::Star) {
            args.push(Expr::Wildcard);
        } else if self.peek_kind() != Some(&TokenKind::RParen) {
            args.push(self.expr()?);
            while self.eat(&TokenKind::Comma) {
                args.push(self.expr()?);
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(Expr::Function {
            name,
            args,
            distinct,
        })
    }
}

fn number_literal(text: &str, offset: usize) -> Result<Literal, SqlError> {
    if text.contains('.') {
        return Ok(Literal::Decimal(text.to_string()));
    }
    text.parse::<i64>()
        .map(Literal::Int)
        .map_err(|_| SqlError::new(format!("integer literal `{text}` out of range"), offset))
}

fn describe(tok: &Token) -> String {
    match &tok.kind {
        TokenKind::Word(w) => format!("`{w}`"),
        TokenKind::QuotedIdent(w) => format!("`\"{w}\"`"),
        TokenKind::Number(n) => format!("number `{n}`"),
        TokenKind::Str(s) => format!("string '{s}'"),
        TokenKind::Comma => "`,`".into(),
        TokenKind::Dot => "`.`".into(),
        TokenKind::LParen => "`(`".into(),
        TokenKind::RParen => "`)`".into(),
        TokenKind::Semicolon => "`;`".into(),
        TokenKind::Star => "`*`".into(),
        TokenKind::Minus => "`-`".into(),
        TokenKind::Eq => "`=`".into(),
        TokenKind::NotEq => "`<>`".into(),
        TokenKind::Lt => "`<`".into(),
        TokenKind::LtEq => "`<=`".into(),
        TokenKind::Gt => "`>`".into(),
        TokenKind::GtEq => "`>=`".into(),
    }
}
