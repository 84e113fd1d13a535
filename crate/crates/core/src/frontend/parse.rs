use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::proofs::ProofTerm;
use crate::syntax::{Atom, Goal, HornClause, Program, ProgramError, Symbol, Term};
use crate::typecheck::Formula;

/// 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Position,
    pub message: String,
}

fn err<T>(pos: Position, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, message: message.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Arrow,
    Implies,
    Lambda,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`<=`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&ch) = chars.peek() {
        let pos = Position { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match ch {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '%' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while chars.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_') {
                    s.push(bump(&mut chars));
                }
                out.push((Tok::Ident(s), pos));
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::Arrow, pos));
                } else {
                    return err(pos, "expected `<=`");
                }
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push((Tok::Implies, pos));
                } else {
                    return err(pos, "expected `=>`");
                }
            }
            _ => {
                let tok = match ch {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    '\\' | 'λ' => Tok::Lambda,
                    '?' => Tok::Question,
                    other => return err(pos, format!("unexpected character `{other}`")),
                };
                bump(&mut chars);
                out.push((tok, pos));
            }
        }
    }
    out.push((Tok::Eof, Position { line, column }));
    Ok(out)
}

fn is_var_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

/// An atom together with where it was written.
struct Located {
    atom: Atom,
    pos: Position,
}

struct RawClause {
    label: Option<(String, Position)>,
    pos: Position,
    head: Located,
    body: Vec<Located>,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(text)?, at: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Position) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Position, ParseError> {
        let (t, pos) = self.next();
        if t == want {
            Ok(pos)
        } else {
            err(pos, format!("expected {want}, found {t}"))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.next();
            true
        } else {
            false
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.next() {
            (Tok::Eof, _) => Ok(()),
            (t, pos) => err(pos, format!("unexpected {t} after end of input")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (t, pos) = self.next();
        let Tok::Ident(name) = t else {
            return err(pos, format!("expected a term, found {t}"));
        };
        if is_var_name(&name) {
            if self.peek() == &Tok::LParen {
                return err(self.pos(), format!("variable `{name}` cannot take arguments"));
            }
            return Ok(Term::var(&name));
        }
        Ok(Term::app(&name, self.args()?))
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            loop {
                args.push(self.term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn atom(&mut self) -> Result<Located, ParseError> {
        let (t, pos) = self.next();
        let Tok::Ident(name) = t else {
            return err(pos, format!("expected an atom, found {t}"));
        };
        if is_var_name(&name) {
            return err(pos, format!("predicate names start with a lowercase letter or digit, found `{name}`"));
        }
        Ok(Located { atom: Atom::new(&name, self.args()?), pos })
    }

    fn atoms(&mut self) -> Result<Vec<Located>, ParseError> {
        let mut out = vec![self.atom()?];
        while self.eat(&Tok::Comma) {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn clause(&mut self) -> Result<RawClause, ParseError> {
        let pos = self.pos();
        let label = match (self.peek().clone(), self.peek2()) {
            (Tok::Ident(l), Tok::Colon) => {
                let p = self.pos();
                self.next();
                self.next();
                Some((l, p))
            }
            _ => None,
        };
        let head = self.atom()?;
        let body = if self.eat(&Tok::Arrow) { self.atoms()? } else { Vec::new() };
        self.expect(Tok::Dot)?;
        Ok(RawClause { label, pos, head, body })
    }
}

/// A parsed program and where each clause starts in the source.
#[derive(Clone, Debug)]
pub struct SourceProgram {
    pub text: String,
    pub program: Program,
    pub spans: Vec<Position>,
}

pub fn parse_source(text: &str) -> Result<SourceProgram, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut raw = Vec::new();
    while parser.peek() != &Tok::Eof {
        raw.push(parser.clause()?);
    }

    let mut taken = HashSet::new();
    for c in &raw {
        if let Some((l, pos)) = &c.label {
            if !taken.insert(l.clone()) {
                return err(*pos, format!("duplicate clause label `{l}`"));
            }
        }
    }
    let mut next_auto = 1;
    let mut clauses = Vec::with_capacity(raw.len());
    let mut spans = Vec::with_capacity(raw.len());
    let mut preds: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut funcs: BTreeMap<Symbol, usize> = BTreeMap::new();
    for (i, c) in raw.into_iter().enumerate() {
        for located in std::iter::once(&c.head).chain(&c.body) {
            check_arities(located, &mut preds, &mut funcs)?;
        }
        let label = match c.label {
            Some((l, _)) => l,
            None => {
                next_auto = next_auto.max(i + 1);
                while taken.contains(&format!("k{next_auto}")) {
                    next_auto += 1;
                }
                let l = format!("k{next_auto}");
                taken.insert(l.clone());
                l
            }
        };
        spans.push(c.pos);
        clauses.push(HornClause::new(&label, c.head.atom, c.body.into_iter().map(|l| l.atom).collect()));
    }
    let program = Program::new(clauses.clone()).map_err(|e| {
        let pos = match &e {
            ProgramError::ReservedSymbol(s) => clauses
                .iter()
                .position(|c| std::iter::once(&c.head).chain(&c.body).any(|a| mentions(a, s)))
                .map(|i| spans[i])
                .unwrap_or_default(),
            _ => Position::default(),
        };
        ParseError { pos, message: e.to_string() }
    })?;
    Ok(SourceProgram { text: text.to_string(), program, spans })
}

fn mentions(a: &Atom, s: &Symbol) -> bool {
    fn term(t: &Term, s: &Symbol) -> bool {
        match t {
            Term::Var(_) => false,
            Term::App(f, args) => f == s || args.iter().any(|a| term(a, s)),
        }
    }
    a.args.iter().any(|t| term(t, s))
}

fn check_arities(
    located: &Located,
    preds: &mut BTreeMap<Symbol, usize>,
    funcs: &mut BTreeMap<Symbol, usize>,
) -> Result<(), ParseError> {
    let a = &located.atom;
    let expected = *preds.entry(a.pred.clone()).or_insert(a.arity());
    if expected != a.arity() {
        return err(
            located.pos,
            format!("predicate `{}` used with {} arguments, previously {expected}", a.pred, a.arity()),
        );
    }
    fn walk(t: &Term, funcs: &mut BTreeMap<Symbol, usize>) -> Result<(), (Symbol, usize, usize)> {
        if let Term::App(f, args) = t {
            let expected = *funcs.entry(f.clone()).or_insert(args.len());
            if expected != args.len() {
                return Err((f.clone(), expected, args.len()));
            }
            args.iter().try_for_each(|a| walk(a, funcs))?;
        }
        Ok(())
    }
    for t in &a.args {
        if let Err((f, expected, found)) = walk(t, funcs) {
            return err(
                located.pos,
                format!("function symbol `{f}` used with {found} arguments, previously {expected}"),
            );
        }
    }
    Ok(())
}

/// Parses a program in the concrete syntax
/// `label: head <= body1, ..., bodyn.` / `label: head.`, labels optional.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_source(text).map(|s| s.program)
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let a = p.atom()?.atom;
    p.eat(&Tok::Dot);
    p.end()?;
    Ok(a)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.end()?;
    Ok(t)
}

/// Comma-separated atoms, optionally wrapped in braces as goals are printed.
pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    let mut p = Parser::new(text)?;
    let braced = p.eat(&Tok::LBrace);
    let atoms = match p.peek() {
        Tok::Eof | Tok::RBrace => Vec::new(),
        _ => p.atoms()?.into_iter().map(|l| l.atom).collect(),
    };
    if braced {
        p.expect(Tok::RBrace)?;
    }
    p.end()?;
    Ok(Goal::new(atoms))
}

/// `head`, `head <= b1, ..., bn` or `b1, ..., bn => head`.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    if p.eat(&Tok::Implies) {
        let head = p.atom()?.atom;
        p.end()?;
        return Ok(Formula::goal(head));
    }
    let first = p.atoms()?;
    let formula = if p.eat(&Tok::Arrow) {
        if first.len() != 1 {
            return err(first[1].pos, "a formula has a single head");
        }
        let body = p.atoms()?.into_iter().map(|l| l.atom).collect();
        Formula::new(body, first.into_iter().next().expect("one atom").atom)
    } else if p.eat(&Tok::Implies) {
        let head = p.atom()?.atom;
        Formula::new(first.into_iter().map(|l| l.atom).collect(), head)
    } else {
        if first.len() != 1 {
            return err(first[1].pos, "expected `<=` or `=>` after a list of atoms");
        }
        Formula::goal(first.into_iter().next().expect("one atom").atom)
    };
    p.eat(&Tok::Dot);
    p.end()?;
    Ok(formula)
}

/// Proof terms: `\a. e` (or `λa. e`), application by juxtaposition,
/// parentheses for grouping. A name bound by an enclosing lambda is a
/// variable; `?a` is a free variable; any other name is a clause label.
pub fn parse_proof(text: &str) -> Result<ProofTerm, ParseError> {
    let mut p = Parser::new(text)?;
    let e = proof(&mut p, &mut Vec::new())?;
    p.end()?;
    Ok(e)
}

fn proof(p: &mut Parser, scope: &mut Vec<String>) -> Result<ProofTerm, ParseError> {
    if p.eat(&Tok::Lambda) {
        let (t, pos) = p.next();
        let Tok::Ident(binder) = t else {
            return err(pos, format!("expected a binder name, found {t}"));
        };
        p.expect(Tok::Dot)?;
        scope.push(binder.clone());
        let body = proof(p, scope);
        scope.pop();
        return Ok(ProofTerm::lam(&binder, body?));
    }
    let mut head = proof_atom(p, scope)?;
    loop {
        match p.peek() {
            Tok::Ident(_) | Tok::LParen | Tok::Question => head = ProofTerm::app(head, proof_atom(p, scope)?),
            Tok::Lambda => {
                let arg = proof(p, scope)?;
                return Ok(ProofTerm::app(head, arg));
            }
            _ => return Ok(head),
        }
    }
}

fn proof_atom(p: &mut Parser, scope: &mut Vec<String>) -> Result<ProofTerm, ParseError> {
    let (t, pos) = p.next();
    match t {
        Tok::Ident(name) if scope.contains(&name) => Ok(ProofTerm::var(&name)),
        Tok::Ident(name) => Ok(ProofTerm::constant(&name)),
        Tok::Question => match p.next() {
            (Tok::Ident(name), _) => Ok(ProofTerm::var(&name)),
            (t, pos) => err(pos, format!("expected a variable name after `?`, found {t}")),
        },
        Tok::LParen => {
            let e = proof(p, scope)?;
            p.expect(Tok::RParen)?;
            Ok(e)
        }
        t => err(pos, format!("expected a proof term, found {t}")),
    }
}
