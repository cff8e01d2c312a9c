use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{check, Loc, SpecError};

const RESERVED: &[&str] = &[
    "given",
    "letting",
    "be",
    "domain",
    "where",
    "find",
    "such",
    "that",
    "minimising",
    "maximising",
    "int",
    "bool",
    "set",
    "relation",
    "of",
    "size",
    "minSize",
    "maxSize",
    "in",
    "subsetEq",
    "toInt",
    "forAll",
    "exists",
    "sum",
    "true",
    "false",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Param,
    Constant,
    Alias,
    Decision,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    globals: HashMap<String, Sym>,
    binders: Vec<String>,
}

/// Parses, resolves, and type-checks a specification.
pub fn parse(src: &str) -> Result<SpecAst, SpecError> {
    let (ast, lines) = parse_unchecked(src)?;
    check::check(&ast).map_err(|e| match e {
        SpecError::Type { stmt: Some(i), msg, .. } => {
            SpecError::Type { stmt: Some(i), line: lines.get(i).copied(), msg }
        }
        other => other,
    })?;
    Ok(ast)
}

/// Parses and resolves names without running the type checker. Also returns
/// the source line each statement starts on.
pub fn parse_unchecked(src: &str) -> Result<(SpecAst, Vec<usize>), SpecError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, globals: HashMap::new(), binders: Vec::new() };
    let mut statements = Vec::new();
    let mut lines = Vec::new();
    while !p.at_eof() {
        let line = p.peek().line;
        for s in p.statement()? {
            statements.push(s);
            lines.push(line);
        }
    }
    Ok((SpecAst { statements }, lines))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    /// Error at the current token. At end of input the position is reported
    /// just after the previous token.
    fn error(&self, expected: &str) -> SpecError {
        let t = self.peek();
        let (line, col) = if t.tok == Tok::Eof && self.pos > 0 {
            let prev = &self.toks[self.pos - 1];
            (prev.end_line, prev.end_col)
        } else {
            (t.line, t.col)
        };
        let after = if self.pos > 0 {
            format!(" after {}", Self::describe(&self.toks[self.pos - 1].tok))
        } else {
            String::new()
        };
        SpecError::Syntax { line, col, msg: format!("expected {expected}{after}, found {}", Self::describe(&t.tok)) }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SpecError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), SpecError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("`{sym}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Loc), SpecError> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, Loc::at(t.line, t.col)))
            }
            _ => Err(self.error(what)),
        }
    }

    fn names(&mut self) -> Result<Vec<(String, Loc)>, SpecError> {
        let mut out = vec![self.ident("a name")?];
        while self.is_sym(",") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            out.push(self.ident("a name")?);
        }
        Ok(out)
    }

    fn declare(&mut self, name: &str, loc: Loc, sym: Sym) -> Result<(), SpecError> {
        if self.globals.contains_key(name) {
            return Err(SpecError::Duplicate { name: name.to_string(), loc });
        }
        self.globals.insert(name.to_string(), sym);
        Ok(())
    }

    /// Parses `names : domain` groups separated by commas.
    fn decl_groups(&mut self, sym: Sym) -> Result<Vec<(Vec<String>, Domain)>, SpecError> {
        let mut groups = Vec::new();
        loop {
            let names = self.names()?;
            self.expect_sym(":")?;
            let domain = self.domain()?;
            for (n, loc) in &names {
                self.declare(n, *loc, sym)?;
            }
            groups.push((names.into_iter().map(|(n, _)| n).collect(), domain));
            let continues =
                self.is_sym(",") && matches!(self.peek_at(1), Tok::Ident(s) if !RESERVED.contains(&s.as_str()));
            if !continues {
                return Ok(groups);
            }
            self.bump();
        }
    }

    fn statement(&mut self) -> Result<Vec<Statement>, SpecError> {
        if self.eat_kw("given") {
            let mut out = Vec::new();
            for (names, domain) in self.decl_groups(Sym::Param)? {
                out.push(Statement::Given { names, domain });
            }
            Ok(out)
        } else if self.eat_kw("find") {
            let mut out = Vec::new();
            for (names, domain) in self.decl_groups(Sym::Decision)? {
                for name in names {
                    out.push(Statement::Find { name, domain: domain.clone() });
                }
            }
            Ok(out)
        } else if self.eat_kw("letting") {
            let (name, loc) = self.ident("a name")?;
            self.expect_kw("be")?;
            if self.eat_kw("domain") {
                let domain = self.domain()?;
                self.declare(&name, loc, Sym::Alias)?;
                Ok(vec![Statement::LettingDomain { name, domain }])
            } else {
                let value = self.expr()?;
                self.declare(&name, loc, Sym::Constant)?;
                Ok(vec![Statement::LettingExpr { name, value }])
            }
        } else if self.eat_kw("where") {
            let mut out = vec![Statement::Where(self.expr()?)];
            while self.eat_sym(",") {
                out.push(Statement::Where(self.expr()?));
            }
            Ok(out)
        } else if self.eat_kw("such") {
            self.expect_kw("that")?;
            let mut exprs = vec![self.expr()?];
            while self.eat_sym(",") {
                exprs.push(self.expr()?);
            }
            Ok(vec![Statement::SuchThat(exprs)])
        } else if self.eat_kw("minimising") {
            Ok(vec![Statement::Objective { direction: Direction::Minimising, expr: self.expr()? }])
        } else if self.eat_kw("maximising") {
            Ok(vec![Statement::Objective { direction: Direction::Maximising, expr: self.expr()? }])
        } else {
            Err(self.error("a statement"))
        }
    }

    fn domain(&mut self) -> Result<Domain, SpecError> {
        if self.eat_kw("bool") {
            return Ok(Domain::Bool);
        }
        if self.eat_kw("int") {
            self.expect_sym("(")?;
            let lo = self.expr()?;
            self.expect_sym("..")?;
            let hi = if self.is_sym(")") { None } else { Some(Box::new(self.expr()?)) };
            self.expect_sym(")")?;
            return Ok(Domain::Int { lo: Box::new(lo), hi });
        }
        if self.is_kw("set") || self.is_kw("relation") {
            let is_set = self.is_kw("set");
            self.bump();
            let attrs = if self.is_sym("(") { self.attrs()? } else { Attrs::default() };
            self.expect_kw("of")?;
            let components = if is_set {
                vec![self.domain()?]
            } else {
                self.expect_sym("(")?;
                let mut cs = vec![self.domain()?];
                while self.eat_sym("*") {
                    cs.push(self.domain()?);
                }
                self.expect_sym(")")?;
                cs
            };
            return Ok(Domain::Relation { attrs, components });
        }
        if let Tok::Ident(name) = &self.peek().tok {
            if !RESERVED.contains(&name.as_str()) {
                let name = name.clone();
                let t = self.bump();
                return match self.globals.get(&name) {
                    Some(Sym::Alias) => Ok(Domain::Ref(name)),
                    Some(_) => Err(SpecError::Type {
                        stmt: None,
                        line: Some(t.line),
                        msg: format!("`{name}` is not a domain"),
                    }),
                    None => Err(SpecError::Unresolved { name, loc: Loc::at(t.line, t.col) }),
                };
            }
        }
        Err(self.error("a domain"))
    }

    fn attrs(&mut self) -> Result<Attrs, SpecError> {
        self.expect_sym("(")?;
        let mut attrs = Attrs::default();
        loop {
            let slot = if self.eat_kw("size") {
                &mut attrs.size
            } else if self.eat_kw("minSize") {
                &mut attrs.min_size
            } else if self.eat_kw("maxSize") {
                &mut attrs.max_size
            } else {
                return Err(self.error("`size`, `minSize` or `maxSize`"));
            };
            if slot.is_some() {
                return Err(self.error("each attribute at most once"));
            }
            *slot = Some(self.expr()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(attrs)
    }

    pub fn expr(&mut self) -> Result<Expr, SpecError> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        match &self.peek().tok {
            Tok::Sym(s) => BinOp::from_token(s),
            Tok::Ident(s) if s == "in" || s == "subsetEq" => BinOp::from_token(s),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SpecError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let next = if op.right_assoc() { prec } else { prec + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SpecError> {
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(v) = self.peek().tok {
                self.bump();
                return Ok(Expr::Int(-v));
            }
            return Ok(Expr::unary(UnaryOp::Neg, self.unary()?));
        }
        if self.eat_sym("!") {
            return Ok(Expr::unary(UnaryOp::Not, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SpecError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(*v))
            }
            Tok::Sym("(") => {
                self.bump();
                let first = self.expr()?;
                if self.eat_sym(",") {
                    let mut items = vec![first, self.expr()?];
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_sym(")")?;
                    Ok(Expr::Tuple(items))
                } else {
                    self.expect_sym(")")?;
                    Ok(first)
                }
            }
            Tok::Sym("|") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym("|")?;
                Ok(Expr::unary(UnaryOp::Card, inner))
            }
            Tok::Sym("{") => self.set_literal(),
            Tok::Ident(s) => {
                let s = s.clone();
                match s.as_str() {
                    "true" => {
                        self.bump();
                        Ok(Expr::Bool(true))
                    }
                    "false" => {
                        self.bump();
                        Ok(Expr::Bool(false))
                    }
                    "toInt" => {
                        self.bump();
                        self.expect_sym("(")?;
                        let inner = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(Expr::unary(UnaryOp::ToInt, inner))
                    }
                    kw if QuantKind::from_keyword(kw).is_some() => self.quantifier(),
                    kw if RESERVED.contains(&kw) => Err(self.error("an expression")),
                    _ => {
                        self.bump();
                        let kind = self.resolve(&s, Loc::at(t.line, t.col))?;
                        Ok(Expr::Ref { name: s, kind })
                    }
                }
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn resolve(&self, name: &str, loc: Loc) -> Result<RefKind, SpecError> {
        if self.binders.iter().any(|b| b == name) {
            return Ok(RefKind::QuantifiedVariable);
        }
        match self.globals.get(name) {
            Some(Sym::Param) => Ok(RefKind::Parameter),
            Some(Sym::Constant) => Ok(RefKind::Constant),
            Some(Sym::Decision) => Ok(RefKind::DecisionVariable),
            Some(Sym::Alias) => Err(SpecError::Type {
                stmt: None,
                line: loc.line(),
                msg: format!("domain `{name}` used as an expression"),
            }),
            None => Err(SpecError::Unresolved { name: name.to_string(), loc }),
        }
    }

    fn signed_int(&mut self) -> Result<i64, SpecError> {
        let neg = self.eat_sym("-");
        match self.peek().tok {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error("an integer")),
        }
    }

    fn set_literal(&mut self) -> Result<Expr, SpecError> {
        self.expect_sym("{")?;
        let mut elems = BTreeSet::new();
        let mut arity: Option<usize> = None;
        if !self.is_sym("}") {
            loop {
                let elem = if self.eat_sym("(") {
                    let mut tuple = vec![self.signed_int()?];
                    while self.eat_sym(",") {
                        tuple.push(self.signed_int()?);
                    }
                    self.expect_sym(")")?;
                    tuple
                } else {
                    vec![self.signed_int()?]
                };
                if *arity.get_or_insert(elem.len()) != elem.len() {
                    return Err(self.error("set elements of equal arity"));
                }
                elems.insert(elem);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(Expr::SetLit(elems))
    }

    fn quantifier(&mut self) -> Result<Expr, SpecError> {
        let Tok::Ident(kw) = self.bump().tok else { unreachable!() };
        let kind = QuantKind::from_keyword(&kw).expect("quantifier keyword");
        let names = self.names()?;
        for (i, (n, loc)) in names.iter().enumerate() {
            if names[..i].iter().any(|(m, _)| m == n) {
                return Err(SpecError::Duplicate { name: n.clone(), loc: *loc });
            }
        }
        let range = if self.eat_sym(":") {
            QuantRange::Domain(self.domain()?)
        } else if self.eat_kw("in") {
            QuantRange::Set(self.primary()?)
        } else {
            return Err(self.error("`:` or `in`"));
        };
        self.expect_sym(".")?;
        let depth = self.binders.len();
        self.binders.extend(names.iter().map(|(n, _)| n.clone()));
        let body = self.expr();
        self.binders.truncate(depth);
        let mut body = body?;
        for (name, _) in names.into_iter().rev() {
            body = Expr::Quant { kind, var: name, range: Box::new(range.clone()), body: Box::new(body) };
        }
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding() {
        let ast = parse("find x : int(0..100)\nsuch that 1*(2+3)*4 = x").unwrap();
        assert_eq!(ast.statements.len(), 2);
        assert_eq!(ast.statements[0], Statement::Find { name: "x".into(), domain: Domain::int(0, 100) });
        let Statement::SuchThat(cs) = &ast.statements[1] else { panic!() };
        assert_eq!(cs.len(), 1);
    }

    #[test]
    fn minimal_bool_spec() {
        let ast = parse("find b : bool such that b").unwrap();
        assert_eq!(ast.finds().count(), 1);
        assert_eq!(ast.constraints().count(), 1);
    }

    #[test]
    fn truncated_input_reports_position_after_colon() {
        match parse("find x :") {
            Err(SpecError::Syntax { line, col, msg }) => {
                assert_eq!((line, col), (1, 9));
                assert!(msg.contains("after `:`"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unresolved_and_duplicate() {
        assert!(matches!(parse("find x : int(1..3) such that y = 1"), Err(SpecError::Unresolved { .. })));
        assert!(matches!(parse("find x : bool find x : bool"), Err(SpecError::Duplicate { .. })));
        assert!(matches!(
            parse("find x : bool such that forAll i, i : int(1..2) . x"),
            Err(SpecError::Duplicate { .. })
        ));
    }

    #[test]
    fn type_mismatch_reports_statement_line() {
        match parse("find x : int(1..3)\nsuch that x /\\ true") {
            Err(SpecError::Type { line, .. }) => assert_eq!(line, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_follows_table() {
        let ast = parse("find a, b, c : bool such that a \\/ b /\\ !c -> a <-> b").unwrap();
        let c = ast.constraints().next().unwrap();
        let Expr::Binary { op: BinOp::Iff, lhs, .. } = c else { panic!("{c:?}") };
        let Expr::Binary { op: BinOp::Implies, lhs, .. } = lhs.as_ref() else { panic!() };
        let Expr::Binary { op: BinOp::Or, rhs, .. } = lhs.as_ref() else { panic!() };
        assert!(matches!(rhs.as_ref(), Expr::Binary { op: BinOp::And, .. }));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let ast = parse("find S : set of int(1..3) such that forAll x in S . x > 1 /\\ x < 3").unwrap();
        let Expr::Quant { body, .. } = ast.constraints().next().unwrap() else { panic!() };
        assert!(matches!(body.as_ref(), Expr::Binary { op: BinOp::And, .. }));
    }

    #[test]
    fn multi_binder_sugar_nests() {
        let ast = parse("find x : bool such that forAll a, b : int(1..2) . a < b -> x").unwrap();
        let Expr::Quant { var, body, .. } = ast.constraints().next().unwrap() else { panic!() };
        assert_eq!(var, "a");
        assert!(matches!(body.as_ref(), Expr::Quant { var, .. } if var == "b"));
    }

    #[test]
    fn negative_literals_fold() {
        let ast = parse("find x : int(-5..-1) such that x > -3").unwrap();
        assert_eq!(ast.statements[0], Statement::Find { name: "x".into(), domain: Domain::int(-5, -1) });
    }

    #[test]
    fn letting_domain_alias() {
        let src = "given n : int(1..)\nletting Boat be domain int(1..n)\nfind hosts : set of Boat";
        let ast = parse(src).unwrap();
        assert!(matches!(&ast.statements[2], Statement::Find { domain: Domain::Relation { components, .. }, .. }
            if components[0] == Domain::Ref("Boat".into())));
    }

    #[test]
    fn nested_relations_rejected() {
        assert!(parse("find s : set of set of int(1..2)").is_err());
    }

    #[test]
    fn find_comma_continuation() {
        let ast = parse("find a : bool,\n     s : set (minSize 1) of int(1..3)").unwrap();
        assert_eq!(ast.finds().count(), 2);
    }
}
