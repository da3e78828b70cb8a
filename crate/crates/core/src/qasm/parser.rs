use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use num_rational::Rational64;

use super::lexer::{lex, Tok, Token};
use super::{ParseError, ParseErrorKind, Parsed};
use crate::gates::names::{from_qasm, is_std_qasm, QASM_NAMES};
use crate::gates::{lookup, ops, ParamKind};
use crate::ir::{build_tape, GateInstruction, Param, WireLabel};
use crate::measure::{Basis, BasisSchema, Factor, MeasurementSpec, Observable};
use crate::types::{TypeEnv, WireType};

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "if",
    "else",
    "for",
    "while",
    "switch",
    "case",
    "break",
    "continue",
    "return",
    "box",
    "delay",
    "duration",
    "stretch",
    "input",
    "output",
    "let",
    "extern",
    "const",
    "end",
    "durationof",
];
const MAX_INLINE_DEPTH: usize = 64;

#[derive(Clone, Debug)]
struct Defn {
    params: Vec<String>,
    args: Vec<(String, Option<WireType>)>,
    /// Token range of the body, braces excluded.
    body: (usize, usize),
    /// `def` bodies see global registers; `gate` bodies only their arguments.
    is_def: bool,
}

#[derive(Clone, Debug, Default)]
struct Scope {
    vals: HashMap<String, f64>,
    wires: HashMap<String, (WireLabel, Option<WireType>)>,
    /// Global registers are visible (top level and `def` bodies).
    globals: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Real(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug)]
enum Mod {
    Inv,
    Pow(Rational64),
    Ctrl(usize),
    NegCtrl(usize),
}

/// Operand resolved to wires plus the statically known type of each.
type Operand = Vec<(WireLabel, Option<WireType>)>;

pub(super) struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    std: bool,
    cv: bool,
    library_mode: bool,
    /// Register → (type, size); `None` for a scalar declaration, whose wire is
    /// the register name itself.
    regs: IndexMap<String, (WireType, Option<usize>)>,
    defs: HashMap<String, Defn>,
    ops: Vec<GateInstruction>,
    touched: HashSet<WireLabel>,
    schema: BasisSchema,
    /// `pragma hybc.expval` / `hybc.var` measurements, in order.
    observables: Vec<MeasurementSpec>,
    prep: Vec<(WireLabel, usize)>,
    env: TypeEnv,
    warnings: Vec<String>,
    depth: usize,
}

impl<'t> Parser<'t> {
    pub(super) fn new(toks: &'t [Token]) -> Self {
        Parser {
            toks,
            pos: 0,
            std: false,
            cv: false,
            library_mode: false,
            regs: IndexMap::new(),
            defs: HashMap::new(),
            ops: Vec::new(),
            touched: HashSet::new(),
            schema: BasisSchema::default(),
            observables: Vec::new(),
            prep: Vec::new(),
            env: TypeEnv::new(),
            warnings: Vec::new(),
            depth: 0,
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(t: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: t.line,
            col: t.col,
            kind,
        }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(Self::err_at(
            self.peek(),
            ParseErrorKind::Syntax(msg.into()),
        ))
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.syntax(format!(
                "expected `{s}`, found {}",
                describe(&self.peek().tok)
            ))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            other => self.syntax(format!("expected an identifier, found {}", describe(other))),
        }
    }

    fn at_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    pub(super) fn program(mut self) -> Result<Parsed, ParseError> {
        if self.at_ident("OPENQASM") {
            self.bump();
            match self.bump() {
                Token {
                    tok: Tok::Num(_, text),
                    ..
                } if text == "3" || text.starts_with("3.") => {}
                t => {
                    return Err(Self::err_at(
                        &t,
                        ParseErrorKind::Unsupported(format!(
                            "OpenQASM version {}",
                            describe(&t.tok)
                        )),
                    ))
                }
            }
            self.expect_sym(";")?;
        }
        let scope = Scope {
            globals: true,
            ..Scope::default()
        };
        while self.peek().tok != Tok::Eof {
            self.statement(&scope)?;
        }
        let mut measurements = std::mem::take(&mut self.observables);
        if !self.schema.entries().is_empty() {
            measurements.push(MeasurementSpec::Sample(self.schema.clone()));
        }
        let tape = build_tape(self.prep, self.ops, measurements, None).map_err(|e| ParseError {
            line: 0,
            col: 0,
            kind: ParseErrorKind::Ir(e.to_string()),
        })?;
        Ok(Parsed {
            tape,
            env: self.env,
            warnings: self.warnings,
        })
    }

    /// Collects the `gate` definitions of a library text.
    pub(super) fn library(mut self) -> Result<Self, ParseError> {
        self.std = true;
        self.cv = true;
        self.library_mode = true;
        let scope = Scope {
            globals: true,
            ..Scope::default()
        };
        while self.peek().tok != Tok::Eof {
            self.statement(&scope)?;
        }
        Ok(self)
    }

    /// Inlines library gate `name` on concrete wires.
    pub(super) fn expand(
        &mut self,
        name: &str,
        params: &[f64],
        wires: &[WireLabel],
    ) -> Option<Vec<GateInstruction>> {
        let d = self.defs.get(name)?.clone();
        let scope = Scope {
            vals: d
                .params
                .iter()
                .cloned()
                .zip(params.iter().copied())
                .collect(),
            wires: d
                .args
                .iter()
                .zip(wires)
                .map(|((n, t), w)| (n.clone(), (w.clone(), *t)))
                .collect(),
            globals: false,
        };
        self.inline(&d, &scope).ok()
    }

    fn statement(&mut self, scope: &Scope) -> Result<(), ParseError> {
        let start = self.peek().clone();
        let word = match &start.tok {
            Tok::Ident(s) => s.clone(),
            Tok::Sym(";") => {
                self.bump();
                return Ok(());
            }
            other => {
                return self.syntax(format!("expected a statement, found {}", describe(other)))
            }
        };
        match word.as_str() {
            "OPENQASM" => Err(Self::err_at(
                &start,
                ParseErrorKind::Syntax("version header must come first".into()),
            )),
            "include" => {
                self.bump();
                let t = self.bump();
                match &t.tok {
                    Tok::Str(s) if s == "stdgates.inc" => self.std = true,
                    Tok::Str(s) if s == "cvstdgates.inc" => self.cv = true,
                    Tok::Str(s) => {
                        return Err(Self::err_at(
                            &t,
                            ParseErrorKind::Unsupported(format!("include of \"{s}\"")),
                        ))
                    }
                    other => {
                        return Err(Self::err_at(
                            &t,
                            ParseErrorKind::Syntax(format!(
                                "expected a file name, found {}",
                                describe(other)
                            )),
                        ))
                    }
                }
                self.expect_sym(";")
            }
            "qubit" | "qumode" => {
                if !scope.globals || self.depth > 0 {
                    return Err(Self::err_at(
                        &start,
                        ParseErrorKind::Unsupported("register declaration inside a body".into()),
                    ));
                }
                self.bump();
                let ty = if word == "qubit" {
                    WireType::Qubit
                } else {
                    WireType::Qumode
                };
                let size = if self.eat_sym("[") {
                    let n = self.expr(scope)?;
                    self.expect_sym("]")?;
                    Some(as_size(&n).ok_or_else(|| {
                        Self::err_at(
                            &start,
                            ParseErrorKind::Syntax(
                                "register size must be a positive integer".into(),
                            ),
                        )
                    })?)
                } else {
                    None
                };
                let name_tok = self.peek().clone();
                let name = self.expect_ident()?;
                if self.regs.contains_key(&name) {
                    return Err(Self::err_at(
                        &name_tok,
                        ParseErrorKind::Register(format!("`{name}` declared twice")),
                    ));
                }
                match size {
                    Some(n) => (0..n).for_each(|i| {
                        self.env.insert(WireLabel::Name(format!("{name}{i}")), ty);
                    }),
                    None => {
                        self.env.insert(WireLabel::Name(name.clone()), ty);
                    }
                }
                self.regs.insert(name, (ty, size));
                self.expect_sym(";")
            }
            "bit" | "uint" | "int" | "float" | "angle" | "bool" | "complex" => {
                self.classical(scope)
            }
            "gate" => self.gate_definition(),
            "def" => self.def_definition(),
            "defcal" | "cal" => {
                self.bump();
                while !self.at_sym("{") {
                    if self.peek().tok == Tok::Eof {
                        return self.syntax("unterminated defcal");
                    }
                    self.bump();
                }
                self.skip_braces()?;
                if !self.library_mode {
                    self.warnings.push(format!(
                        "{}:{}: skipped `{word}` block",
                        start.line, start.col
                    ));
                }
                Ok(())
            }
            "reset" => {
                self.bump();
                loop {
                    let at = self.peek().clone();
                    for (w, _) in self.operand(scope)? {
                        if self.touched.contains(&w) {
                            return Err(Self::err_at(
                                &at,
                                ParseErrorKind::Unsupported(format!(
                                    "reset of {w} after it was used"
                                )),
                            ));
                        }
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")
            }
            "pragma" => self.pragma(scope),
            "barrier" => {
                while !self.at_sym(";") && self.peek().tok != Tok::Eof {
                    self.bump();
                }
                self.expect_sym(";")
            }
            "measure" | "measure_n" | "measure_x" => {
                self.measure(scope)?;
                if self.eat_sym("->") {
                    self.expect_ident()?;
                    if self.eat_sym("[") {
                        self.expr(scope)?;
                        self.expect_sym("]")?;
                    }
                }
                self.expect_sym(";")
            }
            w if UNSUPPORTED_KEYWORDS.contains(&w) => Err(Self::err_at(
                &start,
                ParseErrorKind::Unsupported(format!(
                    "`{w}` (classical control flow and timing are not supported)"
                )),
            )),
            _ if self.is_assignment() => {
                self.expect_ident()?;
                if self.eat_sym("[") {
                    self.expr(scope)?;
                    self.expect_sym("]")?;
                }
                self.expect_sym("=")?;
                self.measure(scope)?;
                self.expect_sym(";")
            }
            _ => self.gate_call(scope),
        }
    }

    fn is_assignment(&self) -> bool {
        match self.peek_at(1) {
            Tok::Sym("=") => true,
            Tok::Sym("[") => {
                let mut k = 2;
                while !matches!(self.peek_at(k), Tok::Sym("]") | Tok::Eof) {
                    k += 1;
                }
                matches!(self.peek_at(k + 1), Tok::Sym("="))
            }
            _ => false,
        }
    }

    fn skip_braces(&mut self) -> Result<(), ParseError> {
        self.expect_sym("{")?;
        let mut depth = 1;
        while depth > 0 {
            match self.bump().tok {
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") => depth -= 1,
                Tok::Eof => return self.syntax("unbalanced braces"),
                _ => {}
            }
        }
        Ok(())
    }

    /// Classical declaration, optionally initialized from a measurement.
    fn classical(&mut self, scope: &Scope) -> Result<(), ParseError> {
        self.bump();
        if self.eat_sym("[") {
            self.expr(scope)?;
            self.expect_sym("]")?;
        }
        self.expect_ident()?;
        if self.eat_sym("=") {
            if !matches!(&self.peek().tok, Tok::Ident(s) if s.starts_with("measure")) {
                return Err(Self::err_at(
                    self.peek(),
                    ParseErrorKind::Unsupported("classical computation".into()),
                ));
            }
            self.measure(scope)?;
        }
        self.expect_sym(";")
    }

    fn measure(&mut self, scope: &Scope) -> Result<(), ParseError> {
        let t = self.peek().clone();
        let kind = self.expect_ident()?;
        let (basis, want) = match kind.as_str() {
            "measure" => (Basis::Discrete, WireType::Qubit),
            "measure_n" => (Basis::Discrete, WireType::Qumode),
            "measure_x" => (Basis::Position, WireType::Qumode),
            _ => {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Syntax(format!("expected a measurement, found `{kind}`")),
                ))
            }
        };
        let at = self.peek().clone();
        for (w, ty) in self.operand(scope)? {
            if let Some(found) = ty.filter(|f| *f != want) {
                return Err(Self::err_at(
                    &at,
                    ParseErrorKind::Type {
                        gate: kind.clone(),
                        position: 1,
                        expected: want,
                        found,
                        signature: format!("{kind}({want})"),
                    },
                ));
            }
            self.schema
                .insert(w, basis)
                .map_err(|e| Self::err_at(&t, ParseErrorKind::Syntax(e.to_string())))?;
        }
        Ok(())
    }

    /// `pragma hybc.prep <wire> <level>`, `pragma hybc.expval [coeff] <Obs> <wire> ...`
    /// and `pragma hybc.var ...`, each on one line. Other pragmas are ignored
    /// with a warning.
    fn pragma(&mut self, scope: &Scope) -> Result<(), ParseError> {
        let start = self.bump();
        let line = start.line;
        let on_line =
            |p: &Self| p.peek().line == line && p.peek().tok != Tok::Eof && !p.at_sym(";");
        if !scope.globals || self.depth > 0 {
            return Err(Self::err_at(
                &start,
                ParseErrorKind::Unsupported("pragma inside a body".into()),
            ));
        }
        if !(self.at_ident("hybc")
            && matches!(self.peek_at(1), Tok::Sym("."))
            && self.peek().line == line)
        {
            while on_line(self) {
                self.bump();
            }
            self.eat_sym(";");
            self.warnings
                .push(format!("{}:{}: ignored pragma", start.line, start.col));
            return Ok(());
        }
        self.bump();
        self.bump();
        let kind_tok = self.peek().clone();
        let kind = self.expect_ident()?;
        match kind.as_str() {
            "prep" => {
                let at = self.peek().clone();
                let wires = self.operand(scope)?;
                let level = self.expr(scope)?;
                let level = as_index(&level).ok_or_else(|| {
                    Self::err_at(
                        &at,
                        ParseErrorKind::Syntax(format!(
                            "level must be a non-negative integer, got {}",
                            show(&level)
                        )),
                    )
                })?;
                for (w, _) in wires {
                    if self.touched.contains(&w) || self.prep.iter().any(|(v, _)| *v == w) {
                        return Err(Self::err_at(
                            &at,
                            ParseErrorKind::Unsupported(format!(
                                "preparation of {w} after it was used"
                            )),
                        ));
                    }
                    self.prep.push((w, level));
                }
            }
            "expval" | "var" => {
                let coeff = if matches!(
                    self.peek().tok,
                    Tok::Num(..) | Tok::Sym("-") | Tok::Sym("(")
                ) {
                    match self.expr(scope)? {
                        Value::Real(x) => x,
                        Value::Vector(_) => return self.syntax("coefficient must be a number"),
                    }
                } else {
                    1.0
                };
                let mut factors = Vec::new();
                while on_line(self) {
                    let name_tok = self.peek().clone();
                    let name = self.expect_ident()?;
                    let at = self.peek().clone();
                    let [(w, ty)] = <[_; 1]>::try_from(self.operand(scope)?).map_err(|_| {
                        Self::err_at(
                            &at,
                            ParseErrorKind::Syntax("observable factors take a single wire".into()),
                        )
                    })?;
                    let f = Factor::from_name(&name, w).map_err(|e| {
                        Self::err_at(&name_tok, ParseErrorKind::Syntax(e.to_string()))
                    })?;
                    if let Some(found) = ty.filter(|t| *t != f.wire_type()) {
                        let want = f.wire_type();
                        return Err(Self::err_at(
                            &at,
                            ParseErrorKind::Type {
                                gate: name.clone(),
                                position: 0,
                                expected: want,
                                found,
                                signature: format!("{name}({want})"),
                            },
                        ));
                    }
                    factors.push(f);
                }
                if factors.is_empty() {
                    return Err(Self::err_at(
                        &kind_tok,
                        ParseErrorKind::Syntax("observable has no factors".into()),
                    ));
                }
                let obs = Observable::new(coeff, factors)
                    .map_err(|e| Self::err_at(&kind_tok, ParseErrorKind::Syntax(e.to_string())))?;
                self.observables.push(if kind == "expval" {
                    MeasurementSpec::Expval(obs)
                } else {
                    MeasurementSpec::Var(obs)
                });
            }
            other => {
                return Err(Self::err_at(
                    &kind_tok,
                    ParseErrorKind::Unsupported(format!("pragma hybc.{other}")),
                ))
            }
        }
        if on_line(self) {
            return self.syntax("unexpected tokens after pragma");
        }
        self.eat_sym(";");
        Ok(())
    }

    fn gate_definition(&mut self) -> Result<(), ParseError> {
        self.bump();
        let name_tok = self.peek().clone();
        let name = self.expect_ident()?;
        let mut params = Vec::new();
        if self.eat_sym("(") {
            while !self.eat_sym(")") {
                params.push(self.expect_ident()?);
                if !self.at_sym(")") {
                    self.expect_sym(",")?;
                }
            }
        }
        let mut args = Vec::new();
        while !self.at_sym("{") {
            let first = self.expect_ident()?;
            let arg = match first.as_str() {
                "qubit" => (self.expect_ident()?, Some(WireType::Qubit)),
                "qumode" => (self.expect_ident()?, Some(WireType::Qumode)),
                _ => (first, None),
            };
            args.push(arg);
            if !self.at_sym("{") {
                self.expect_sym(",")?;
            }
        }
        self.define(&name_tok, name, params, args, false)
    }

    fn def_definition(&mut self) -> Result<(), ParseError> {
        self.bump();
        let name_tok = self.peek().clone();
        let name = self.expect_ident()?;
        let (mut params, mut args) = (Vec::new(), Vec::new());
        self.expect_sym("(")?;
        while !self.eat_sym(")") {
            let ty_tok = self.peek().clone();
            let ty = self.expect_ident()?;
            if self.at_sym("[") {
                return Err(Self::err_at(
                    &ty_tok,
                    ParseErrorKind::Unsupported("register arguments to def".into()),
                ));
            }
            let n = self.expect_ident()?;
            match ty.as_str() {
                "qubit" => args.push((n, Some(WireType::Qubit))),
                "qumode" => args.push((n, Some(WireType::Qumode))),
                "float" | "angle" | "int" | "uint" => params.push(n),
                other => {
                    return Err(Self::err_at(
                        &ty_tok,
                        ParseErrorKind::Unsupported(format!("def argument type `{other}`")),
                    ))
                }
            }
            if !self.at_sym(")") {
                self.expect_sym(",")?;
            }
        }
        if self.at_sym("->") {
            return Err(Self::err_at(
                self.peek(),
                ParseErrorKind::Unsupported("def with a return value".into()),
            ));
        }
        self.define(&name_tok, name, params, args, true)
    }

    fn define(
        &mut self,
        at: &Token,
        name: String,
        params: Vec<String>,
        args: Vec<(String, Option<WireType>)>,
        is_def: bool,
    ) -> Result<(), ParseError> {
        if !self.library_mode && (self.builtin(&name).is_some() || self.defs.contains_key(&name)) {
            return Err(Self::err_at(
                at,
                ParseErrorKind::Syntax(format!("`{name}` is already defined")),
            ));
        }
        let start = self.pos + 1;
        self.skip_braces()?;
        self.defs.insert(
            name,
            Defn {
                params,
                args,
                body: (start, self.pos - 1),
                is_def,
            },
        );
        Ok(())
    }

    fn builtin(&self, q: &str) -> Option<&'static str> {
        let ir = from_qasm(q).or(if q == "cnot" { Some("CNOT") } else { None })?;
        let enabled = if is_std_qasm(q) || q == "cnot" {
            self.std
        } else {
            self.cv
        };
        enabled.then_some(ir)
    }

    fn operand(&mut self, scope: &Scope) -> Result<Operand, ParseError> {
        let t = self.peek().clone();
        let name = self.expect_ident()?;
        if let Some((w, ty)) = scope.wires.get(&name) {
            if self.at_sym("[") {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Syntax(format!("`{name}` is a single wire")),
                ));
            }
            return Ok(vec![(w.clone(), *ty)]);
        }
        let Some(&(ty, size)) = self.regs.get(&name).filter(|_| scope.globals) else {
            return Err(Self::err_at(
                &t,
                ParseErrorKind::Register(format!("`{name}` is not declared")),
            ));
        };
        let Some(size) = size else {
            if self.at_sym("[") {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Syntax(format!("`{name}` is a single wire")),
                ));
            }
            return Ok(vec![(WireLabel::Name(name), Some(ty))]);
        };
        if self.eat_sym("[") {
            let v = self.expr(scope)?;
            self.expect_sym("]")?;
            let i = as_index(&v).filter(|&i| i < size).ok_or_else(|| {
                Self::err_at(
                    &t,
                    ParseErrorKind::Register(format!(
                        "index {} out of range for `{name}[{size}]`",
                        show(&v)
                    )),
                )
            })?;
            Ok(vec![(WireLabel::Name(format!("{name}{i}")), Some(ty))])
        } else {
            Ok((0..size)
                .map(|i| (WireLabel::Name(format!("{name}{i}")), Some(ty)))
                .collect())
        }
    }

    fn modifiers(&mut self) -> Result<Vec<Mod>, ParseError> {
        let mut mods = Vec::new();
        loop {
            let m = match &self.peek().tok {
                Tok::Ident(s) if s == "inv" => {
                    self.bump();
                    Mod::Inv
                }
                Tok::Ident(s) if s == "ctrl" || s == "negctrl" => {
                    let neg = s == "negctrl";
                    self.bump();
                    let n = if self.eat_sym("(") {
                        let t = self.peek().clone();
                        let v = self.expr(&Scope::default())?;
                        self.expect_sym(")")?;
                        as_size(&v).ok_or_else(|| {
                            Self::err_at(
                                &t,
                                ParseErrorKind::Syntax(
                                    "control count must be a positive integer".into(),
                                ),
                            )
                        })?
                    } else {
                        1
                    };
                    if neg {
                        Mod::NegCtrl(n)
                    } else {
                        Mod::Ctrl(n)
                    }
                }
                Tok::Ident(s) if s == "pow" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let k = self.rational()?;
                    self.expect_sym(")")?;
                    Mod::Pow(k)
                }
                _ => return Ok(mods),
            };
            self.expect_sym("@")?;
            mods.push(m);
        }
    }

    fn rational(&mut self) -> Result<Rational64, ParseError> {
        let neg = self.eat_sym("-");
        let int = |p: &mut Self| -> Result<i64, ParseError> {
            let t = p.bump();
            match &t.tok {
                Tok::Num(_, text) if text.chars().all(|c| c.is_ascii_digit()) => {
                    text.parse().map_err(|_| {
                        Self::err_at(&t, ParseErrorKind::Syntax("exponent too large".into()))
                    })
                }
                other => Err(Self::err_at(
                    &t,
                    ParseErrorKind::Unsupported(format!("non-rational power {}", describe(other))),
                )),
            }
        };
        let n = int(self)?;
        let d = if self.eat_sym("/") { int(self)? } else { 1 };
        if d == 0 {
            return self.syntax("zero denominator");
        }
        let r = Rational64::new(n, d);
        Ok(if neg { -r } else { r })
    }

    fn gate_call(&mut self, scope: &Scope) -> Result<(), ParseError> {
        let mods = self.modifiers()?;
        let name_tok = self.peek().clone();
        let name = self.expect_ident()?;
        let mut values = Vec::new();
        if self.eat_sym("(") {
            while !self.eat_sym(")") {
                values.push(self.expr(scope)?);
                if !self.at_sym(")") {
                    self.expect_sym(",")?;
                }
            }
        }
        let mut operands = Vec::new();
        while !self.at_sym(";") {
            operands.push((self.peek().clone(), self.operand(scope)?));
            if !self.at_sym(";") {
                self.expect_sym(",")?;
            }
        }
        self.expect_sym(";")?;
        // broadcast over whole registers
        let width = operands
            .iter()
            .map(|(_, o)| o.len())
            .filter(|&n| n > 1)
            .max()
            .unwrap_or(1);
        for (t, o) in &operands {
            if o.len() != 1 && o.len() != width {
                return Err(Self::err_at(
                    t,
                    ParseErrorKind::Register("registers of different sizes in one call".into()),
                ));
            }
        }
        for k in 0..width {
            let args: Vec<(Token, WireLabel, Option<WireType>)> = operands
                .iter()
                .map(|(t, o)| {
                    let (w, ty) = if o.len() == 1 {
                        o[0].clone()
                    } else {
                        o[k].clone()
                    };
                    (t.clone(), w, ty)
                })
                .collect();
            let seq = self.call(&name_tok, &name, &mods, &values, &args)?;
            for g in &seq {
                self.touched.extend(g.wires().iter().cloned());
            }
            self.ops.extend(seq);
        }
        Ok(())
    }

    fn call(
        &mut self,
        at: &Token,
        name: &str,
        mods: &[Mod],
        values: &[Value],
        args: &[(Token, WireLabel, Option<WireType>)],
    ) -> Result<Vec<GateInstruction>, ParseError> {
        let n_ctrl: usize = mods
            .iter()
            .map(|m| match m {
                Mod::Ctrl(n) | Mod::NegCtrl(n) => *n,
                _ => 0,
            })
            .sum();
        if args.len() < n_ctrl {
            return Err(Self::err_at(
                at,
                ParseErrorKind::Syntax(format!("`{name}` needs {n_ctrl} control arguments")),
            ));
        }
        for (i, (t, _, ty)) in args[..n_ctrl].iter().enumerate() {
            if let Some(found) = ty.filter(|f| *f != WireType::Qubit) {
                return Err(Self::err_at(
                    t,
                    ParseErrorKind::Type {
                        gate: name.to_owned(),
                        position: i + 1,
                        expected: WireType::Qubit,
                        found,
                        signature: "ctrl @ (qubit control)".into(),
                    },
                ));
            }
        }
        let base = &args[n_ctrl..];
        let seq = if let Some(ir) = self.builtin(name) {
            let def = lookup(ir).expect("library gate");
            if base.len() != def.arity {
                return Err(Self::err_at(
                    at,
                    ParseErrorKind::Syntax(format!(
                        "`{name}` takes {} quantum arguments, got {}",
                        def.arity,
                        base.len()
                    )),
                ));
            }
            if values.len() != def.params.len() {
                return Err(Self::err_at(
                    at,
                    ParseErrorKind::Syntax(format!(
                        "`{name}` takes {} parameters, got {}",
                        def.params.len(),
                        values.len()
                    )),
                ));
            }
            if let Some(sig) = def.declared_signature() {
                for (i, ((t, _, ty), want)) in base.iter().zip(&sig).enumerate() {
                    if let Some(found) = ty.filter(|f| f != want) {
                        let source = if is_std_qasm(name) {
                            "stdgates.inc"
                        } else {
                            "cvstdgates.inc"
                        };
                        let list: Vec<String> = sig.iter().map(ToString::to_string).collect();
                        return Err(Self::err_at(
                            t,
                            ParseErrorKind::Type {
                                gate: name.to_owned(),
                                position: n_ctrl + i + 1,
                                expected: *want,
                                found,
                                signature: format!("{source}: {name}({})", list.join(", ")),
                            },
                        ));
                    }
                }
            }
            let params = def
                .params
                .iter()
                .zip(values)
                .map(|(spec, v)| match (spec.kind, v) {
                    (ParamKind::AngleVector, Value::Vector(x)) => Ok(Param::Vector(x.clone())),
                    (ParamKind::AngleVector, Value::Real(x)) => Ok(Param::Vector(vec![*x])),
                    (_, Value::Real(x)) => Ok(Param::Real(*x)),
                    (_, Value::Vector(_)) => Err(Self::err_at(
                        at,
                        ParseErrorKind::Syntax(format!("`{name}`: {} must be a scalar", spec.name)),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let g = GateInstruction::new(
                def,
                params,
                base.iter().map(|(_, w, _)| w.clone()).collect(),
            )
            .map_err(|e| Self::err_at(at, ParseErrorKind::Ir(e.to_string())))?;
            vec![g]
        } else if let Some(d) = self.defs.get(name).cloned() {
            if base.len() != d.args.len() {
                return Err(Self::err_at(
                    at,
                    ParseErrorKind::Syntax(format!(
                        "`{name}` takes {} quantum arguments, got {}",
                        d.args.len(),
                        base.len()
                    )),
                ));
            }
            if values.len() != d.params.len() {
                return Err(Self::err_at(
                    at,
                    ParseErrorKind::Syntax(format!(
                        "`{name}` takes {} parameters, got {}",
                        d.params.len(),
                        values.len()
                    )),
                ));
            }
            let mut scope = Scope {
                globals: false,
                ..Scope::default()
            };
            for (i, ((t, w, ty), (arg, want))) in base.iter().zip(&d.args).enumerate() {
                if let (Some(found), Some(want)) = (ty, want) {
                    if found != want {
                        let list: Vec<String> = d
                            .args
                            .iter()
                            .map(|(n, t)| t.map_or(n.clone(), |t| format!("{t} {n}")))
                            .collect();
                        return Err(Self::err_at(
                            t,
                            ParseErrorKind::Type {
                                gate: name.to_owned(),
                                position: n_ctrl + i + 1,
                                expected: *want,
                                found: *found,
                                signature: format!("{name}({})", list.join(", ")),
                            },
                        ));
                    }
                }
                scope.wires.insert(arg.clone(), (w.clone(), ty.or(*want)));
            }
            for (p, v) in d.params.iter().zip(values) {
                match v {
                    Value::Real(x) => scope.vals.insert(p.clone(), *x),
                    Value::Vector(_) => {
                        return Err(Self::err_at(
                            at,
                            ParseErrorKind::Unsupported("array argument to a user gate".into()),
                        ))
                    }
                };
            }
            scope.globals = d.is_def;
            if self.depth >= MAX_INLINE_DEPTH {
                return Err(Self::err_at(
                    at,
                    ParseErrorKind::Unsupported(format!("recursive definition of `{name}`")),
                ));
            }
            self.inline(&d, &scope)?
        } else {
            return Err(Self::err_at(at, self.unknown(name)));
        };
        self.apply_modifiers(at, seq, mods, &args[..n_ctrl])
    }

    fn unknown(&self, name: &str) -> ParseErrorKind {
        if name.len() >= 2 && name.chars().all(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            return ParseErrorKind::Unsupported(format!("Pauli-string instruction `{name}`"));
        }
        if let Some(ir) = from_qasm(name) {
            let inc = if is_std_qasm(name) {
                "stdgates.inc"
            } else {
                "cvstdgates.inc"
            };
            return ParseErrorKind::UnknownGate(format!(
                "{name} (maps to {ir}; missing include \"{inc}\"?)"
            ));
        }
        let near: Vec<&str> = QASM_NAMES
            .iter()
            .map(|(_, q)| *q)
            .filter(|q| close(q, name))
            .collect();
        if near.is_empty() {
            ParseErrorKind::UnknownGate(name.to_owned())
        } else {
            ParseErrorKind::UnknownGate(format!("{name} (did you mean {}?)", near.join(", ")))
        }
    }

    fn inline(&mut self, d: &Defn, scope: &Scope) -> Result<Vec<GateInstruction>, ParseError> {
        let saved_pos = self.pos;
        let saved_ops = std::mem::take(&mut self.ops);
        self.pos = d.body.0;
        self.depth += 1;
        let mut result = Ok(());
        while self.pos < d.body.1 {
            result = self.statement(scope);
            if result.is_err() {
                break;
            }
        }
        self.depth -= 1;
        self.pos = saved_pos;
        let body = std::mem::replace(&mut self.ops, saved_ops);
        result.map(|_| body)
    }

    fn apply_modifiers(
        &self,
        at: &Token,
        mut seq: Vec<GateInstruction>,
        mods: &[Mod],
        ctrls: &[(Token, WireLabel, Option<WireType>)],
    ) -> Result<Vec<GateInstruction>, ParseError> {
        let ir = |e: crate::ir::IrError| Self::err_at(at, ParseErrorKind::Ir(e.to_string()));
        // controls are consumed outermost first, modifiers applied innermost first
        let mut assigned = Vec::new();
        let mut k = 0;
        for m in mods {
            let n = match m {
                Mod::Ctrl(n) | Mod::NegCtrl(n) => *n,
                _ => 0,
            };
            assigned.push(
                ctrls[k..k + n]
                    .iter()
                    .map(|(_, w, _)| w.clone())
                    .collect::<Vec<_>>(),
            );
            k += n;
        }
        for (m, wires) in mods.iter().zip(assigned).rev() {
            match m {
                Mod::Inv => {
                    seq.reverse();
                    seq = seq.iter().map(GateInstruction::adjoint).collect();
                }
                Mod::Pow(p) => {
                    if seq.len() == 1 {
                        seq = vec![seq[0].power(*p)];
                    } else if p.is_integer() {
                        let n = *p.numer();
                        let unit: Vec<GateInstruction> = if n < 0 {
                            seq.iter().rev().map(GateInstruction::adjoint).collect()
                        } else {
                            seq.clone()
                        };
                        seq = (0..n.unsigned_abs())
                            .flat_map(|_| unit.iter().cloned())
                            .collect();
                    } else {
                        return Err(Self::err_at(
                            at,
                            ParseErrorKind::Unsupported(
                                "fractional power of a multi-gate definition".into(),
                            ),
                        ));
                    }
                }
                Mod::Ctrl(_) | Mod::NegCtrl(_) => {
                    for w in wires.iter().rev() {
                        seq = seq
                            .iter()
                            .map(|g| g.controlled_by(w.clone()))
                            .collect::<Result<_, _>>()
                            .map_err(ir)?;
                    }
                    if matches!(m, Mod::NegCtrl(_)) {
                        let flips: Vec<GateInstruction> =
                            wires.iter().map(|w| ops::x(w.clone())).collect();
                        seq = flips
                            .iter()
                            .cloned()
                            .chain(seq)
                            .chain(flips.iter().cloned())
                            .collect();
                    }
                }
            }
        }
        Ok(seq)
    }

    // expressions

    fn expr(&mut self, scope: &Scope) -> Result<Value, ParseError> {
        let mut v = self.term(scope)?;
        loop {
            let op = if self.at_sym("+") {
                '+'
            } else if self.at_sym("-") {
                '-'
            } else {
                return Ok(v);
            };
            self.bump();
            let r = self.term(scope)?;
            v = self.arith(v, r, op)?;
        }
    }

    fn term(&mut self, scope: &Scope) -> Result<Value, ParseError> {
        let mut v = self.unary(scope)?;
        loop {
            let op = if self.at_sym("*") {
                '*'
            } else if self.at_sym("/") {
                '/'
            } else {
                return Ok(v);
            };
            self.bump();
            let r = self.unary(scope)?;
            v = self.arith(v, r, op)?;
        }
    }

    fn unary(&mut self, scope: &Scope) -> Result<Value, ParseError> {
        if self.eat_sym("-") {
            let v = self.unary(scope)?;
            return self.arith(Value::Real(0.0), v, '-');
        }
        if self.eat_sym("+") {
            return self.unary(scope);
        }
        let base = self.atom(scope)?;
        if self.eat_sym("^") {
            let e = self.unary(scope)?;
            return self.arith(base, e, '^');
        }
        Ok(base)
    }

    fn arith(&self, a: Value, b: Value, op: char) -> Result<Value, ParseError> {
        let (Value::Real(x), Value::Real(y)) = (a, b) else {
            return self.syntax("arithmetic on an array");
        };
        Ok(Value::Real(match op {
            '+' => x + y,
            '-' => x - y,
            '*' => x * y,
            '/' => x / y,
            _ => x.powf(y),
        }))
    }

    fn atom(&mut self, scope: &Scope) -> Result<Value, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(v, _) => Ok(Value::Real(*v)),
            Tok::Sym("(") => {
                let v = self.expr(scope)?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Sym("{") => {
                let mut xs = Vec::new();
                while !self.eat_sym("}") {
                    match self.expr(scope)? {
                        Value::Real(x) => xs.push(x),
                        Value::Vector(_) => return self.syntax("nested arrays"),
                    }
                    if !self.at_sym("}") {
                        self.expect_sym(",")?;
                    }
                }
                Ok(Value::Vector(xs))
            }
            Tok::Ident(id) => {
                if self.at_sym("(") {
                    self.bump();
                    let arg = self.expr(scope)?;
                    self.expect_sym(")")?;
                    let Value::Real(x) = arg else {
                        return self.syntax("function of an array");
                    };
                    let f: fn(f64) -> f64 = match id.as_str() {
                        "sin" => f64::sin,
                        "cos" => f64::cos,
                        "tan" => f64::tan,
                        "arcsin" => f64::asin,
                        "arccos" => f64::acos,
                        "arctan" => f64::atan,
                        "exp" => f64::exp,
                        "ln" => f64::ln,
                        "sqrt" => f64::sqrt,
                        _ => {
                            return Err(Self::err_at(
                                &t,
                                ParseErrorKind::Syntax(format!("unknown function `{id}`")),
                            ))
                        }
                    };
                    return Ok(Value::Real(f(x)));
                }
                match id.as_str() {
                    "pi" | "π" => Ok(Value::Real(std::f64::consts::PI)),
                    "tau" | "τ" => Ok(Value::Real(std::f64::consts::TAU)),
                    "euler" | "ℇ" => Ok(Value::Real(std::f64::consts::E)),
                    _ => scope.vals.get(id).map(|x| Value::Real(*x)).ok_or_else(|| {
                        Self::err_at(
                            &t,
                            ParseErrorKind::Syntax(format!("unknown identifier `{id}`")),
                        )
                    }),
                }
            }
            other => Err(Self::err_at(
                &t,
                ParseErrorKind::Syntax(format!(
                    "expected an expression, found {}",
                    describe(other)
                )),
            )),
        }
    }
}

fn as_size(v: &Value) -> Option<usize> {
    as_index(v).filter(|&n| n > 0)
}

fn as_index(v: &Value) -> Option<usize> {
    match v {
        Value::Real(x) if *x >= 0.0 && x.fract() == 0.0 => Some(*x as usize),
        _ => None,
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Real(x) => x.to_string(),
        Value::Vector(_) => "array".into(),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(_, s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Names within one edit of each other, or equal up to case.
fn close(a: &str, b: &str) -> bool {
    if a.eq_ignore_ascii_case(b) {
        return true;
    }
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    if a.len().abs_diff(b.len()) > 1 {
        return false;
    }
    let (mut i, mut j, mut edits) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            i += 1;
            j += 1;
            continue;
        }
        edits += 1;
        match a.len().cmp(&b.len()) {
            std::cmp::Ordering::Greater => i += 1,
            std::cmp::Ordering::Less => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    edits + (a.len() - i) + (b.len() - j) <= 1
}

pub(super) fn parse(src: &str) -> Result<Parsed, ParseError> {
    let toks = lex(src)?;
    Parser::new(&toks).program()
}
