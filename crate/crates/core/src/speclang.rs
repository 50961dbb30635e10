//! The `.fqz` specification language.
//!
//! A line-oriented transliteration of straight-line quantum programs:
//!
//! ```text
//! oracle f = const0        -- one of const0, const1, id, not
//! qubit x = H|0>           -- |0> |1> |+> |-> H|0> H|1>
//! qubit y = H|1>
//! N[f] x y                 -- oracle: |x, y> -> |x, f(x) xor y>
//! H x                      -- also I, X, Z and R(<angle>)
//! measure x
//! ```
//!
//! Angles are decimal radians or one of `pi`, `pi/2`, `pi/4`, optionally
//! negated. `--` starts a comment running to the end of the line.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, InitialKet, Instruction, OracleFn};
use crate::gateset::{self, GateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Ident,
    Ket,
    Gate,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Equals,
    Number,
    Newline,
    Comment,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Ident => "identifier",
            TokenKind::Ket => "ket literal",
            TokenKind::Gate => "gate",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::LBracket => "'['",
            TokenKind::RBracket => "']'",
            TokenKind::Equals => "'='",
            TokenKind::Number => "number",
            TokenKind::Newline => "end of line",
            TokenKind::Comment => "comment",
            TokenKind::Eof => "end of input",
        })
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Default for Location {
    fn default() -> Self {
        Location { line: 1, column: 1 }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn location(&self) -> Location {
        Location {
            line: self.line,
            column: self.column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub expected: Vec<TokenKind>,
}

impl ParseError {
    fn at(loc: Location, message: impl Into<String>, expected: Vec<TokenKind>) -> Self {
        ParseError {
            message: message.into(),
            line: loc.line,
            column: loc.column,
            expected,
        }
    }

    pub fn location(&self) -> Location {
        Location {
            line: self.line,
            column: self.column,
        }
    }
}

const KEYWORDS: [&str; 7] = [
    "qubit", "oracle", "measure", "const0", "const1", "id", "not",
];
const GATES: [&str; 6] = ["I", "X", "Z", "H", "R", "N"];
const KETS: [&str; 4] = ["|0>", "|1>", "|+>", "|->"];

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            tokens: Vec::new(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn here(&self) -> Location {
        Location {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        self.column += 1;
        c
    }

    fn push(&mut self, kind: TokenKind, lexeme: String, at: Location) {
        self.tokens.push(Token {
            kind,
            lexeme,
            line: at.line,
            column: at.column,
        });
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        while let Some(c) = self.peek(0) {
            let at = self.here();
            match c {
                ' ' | '\t' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    self.push(TokenKind::Newline, "\n".into(), at);
                    self.line += 1;
                    self.column = 1;
                }
                '\r' if self.peek(1) == Some('\n') => {
                    self.pos += 2;
                    self.push(TokenKind::Newline, "\r\n".into(), at);
                    self.line += 1;
                    self.column = 1;
                }
                '-' if self.peek(1) == Some('-') => {
                    let mut text = String::new();
                    while let Some(c) = self.peek(0) {
                        if c == '\n' || (c == '\r' && self.peek(1) == Some('\n')) {
                            break;
                        }
                        text.push(self.bump());
                    }
                    self.push(TokenKind::Comment, text, at);
                }
                '-' if matches!(self.peek(1), Some('0'..='9' | 'p')) => {
                    self.bump();
                    let mut text = String::from("-");
                    if self.peek(0) == Some('p') {
                        self.lex_word(at)?;
                        let tok = self.tokens.pop().expect("word token");
                        if tok.kind != TokenKind::Number {
                            return Err(ParseError::at(
                                at,
                                "expected a number after '-'",
                                vec![TokenKind::Number],
                            ));
                        }
                        text.push_str(&tok.lexeme);
                    } else {
                        text.push_str(&self.lex_digits()?);
                    }
                    self.push(TokenKind::Number, text, at);
                }
                '0'..='9' => {
                    let text = self.lex_digits()?;
                    self.push(TokenKind::Number, text, at);
                }
                '|' => self.lex_ket(at, "")?,
                '(' | ')' | '[' | ']' | '=' => {
                    self.bump();
                    let kind = match c {
                        '(' => TokenKind::LParen,
                        ')' => TokenKind::RParen,
                        '[' => TokenKind::LBracket,
                        ']' => TokenKind::RBracket,
                        _ => TokenKind::Equals,
                    };
                    self.push(kind, c.to_string(), at);
                }
                c if c.is_ascii_alphabetic() || c == '_' => self.lex_word(at)?,
                other => {
                    return Err(ParseError::at(
                        at,
                        format!("unexpected character {other:?}"),
                        vec![],
                    ));
                }
            }
        }
        let at = self.here();
        self.push(TokenKind::Eof, String::new(), at);
        Ok(self.tokens)
    }

    fn take_digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c @ '0'..='9') = self.peek(0) {
            self.bump();
            s.push(c);
        }
        s
    }

    fn lex_digits(&mut self) -> Result<String, ParseError> {
        let mut text = self.take_digits();
        if self.peek(0) == Some('.') {
            self.bump();
            let frac = self.take_digits();
            if frac.is_empty() {
                return Err(ParseError::at(
                    self.here(),
                    "expected digits after '.'",
                    vec![TokenKind::Number],
                ));
            }
            text.push('.');
            text.push_str(&frac);
        }
        if let Some(e @ ('e' | 'E')) = self.peek(0) {
            self.bump();
            text.push(e);
            if let Some(sign @ ('+' | '-')) = self.peek(0) {
                self.bump();
                text.push(sign);
            }
            let exp = self.take_digits();
            if exp.is_empty() {
                return Err(ParseError::at(
                    self.here(),
                    "expected exponent digits",
                    vec![TokenKind::Number],
                ));
            }
            text.push_str(&exp);
        }
        Ok(text)
    }

    fn lex_ket(&mut self, at: Location, prefix: &str) -> Result<(), ParseError> {
        let mut body = String::new();
        while body.len() < 3 {
            match self.peek(0) {
                Some(c) if c != '\n' && c != '\r' => body.push(self.bump()),
                _ => break,
            }
            if body.ends_with('>') {
                break;
            }
        }
        let valid = match prefix {
            "H" => matches!(body.as_str(), "|0>" | "|1>"),
            _ => KETS.contains(&body.as_str()),
        };
        let text = format!("{prefix}{body}");
        if !valid {
            return Err(ParseError::at(
                at,
                format!("invalid ket {text:?}, expected one of |0> |1> |+> |-> H|0> H|1>"),
                vec![TokenKind::Ket],
            ));
        }
        self.push(TokenKind::Ket, text, at);
        Ok(())
    }

    fn lex_word(&mut self, at: Location) -> Result<(), ParseError> {
        let mut word = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' {
                word.push(self.bump());
            } else {
                break;
            }
        }
        if word == "H" && self.peek(0) == Some('|') {
            return self.lex_ket(at, &word);
        }
        if word == "pi" {
            if self.peek(0) == Some('/') {
                let slash = self.here();
                self.bump();
                let den = self.take_digits();
                if den != "2" && den != "4" {
                    return Err(ParseError::at(
                        slash,
                        "only pi, pi/2 and pi/4 are supported",
                        vec![TokenKind::Number],
                    ));
                }
                word.push('/');
                word.push_str(&den);
            }
            self.push(TokenKind::Number, word, at);
            return Ok(());
        }
        let kind = if KEYWORDS.contains(&word.as_str()) {
            TokenKind::Keyword
        } else if GATES.contains(&word.as_str()) {
            TokenKind::Gate
        } else {
            TokenKind::Ident
        };
        self.push(kind, word, at);
        Ok(())
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    Lexer::new(source).run()
}

/// Single-qubit gates that take one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateRef {
    I,
    X,
    Z,
    H,
    /// Phase shift by the given angle in radians.
    R(f64),
}

impl GateRef {
    pub fn to_gate(self) -> Result<gateset::Gate, GateError> {
        match self {
            GateRef::I => Ok(gateset::identity_gate()),
            GateRef::X => Ok(gateset::pauli_x()),
            GateRef::Z => Ok(gateset::pauli_z()),
            GateRef::H => Ok(gateset::hadamard()),
            GateRef::R(phi) => gateset::phase_shift(phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Alloc {
        qubit: String,
        init: InitialKet,
    },
    Apply {
        gate: GateRef,
        target: String,
    },
    Oracle {
        oracle: String,
        control: String,
        register: String,
    },
    Measure {
        qubit: String,
    },
}

impl StatementKind {
    fn qubits(&self) -> Vec<&str> {
        match self {
            StatementKind::Alloc { .. } => vec![],
            StatementKind::Apply { target, .. } => vec![target],
            StatementKind::Oracle {
                control, register, ..
            } => vec![control, register],
            StatementKind::Measure { qubit } => vec![qubit],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StatementKind,
    pub loc: Location,
}

#[derive(Debug, Clone)]
pub struct OracleDecl {
    pub name: String,
    pub oracle: OracleFn,
    pub loc: Location,
}

/// Parsed source. Equality compares structure only; locations are ignored.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub oracle_decls: Vec<OracleDecl>,
    pub statements: Vec<Statement>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.oracle_decls.len() == other.oracle_decls.len()
            && self.statements.len() == other.statements.len()
            && self
                .oracle_decls
                .iter()
                .zip(&other.oracle_decls)
                .all(|(a, b)| a.name == b.name && a.oracle == b.oracle)
            && self
                .statements
                .iter()
                .zip(&other.statements)
                .all(|(a, b)| a.kind == b.kind)
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> &'t Token {
        let tok = self.peek();
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(tok: &Token, expected: Vec<TokenKind>) -> ParseError {
        let found = if tok.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("{} {:?}", tok.kind, tok.lexeme)
        };
        let wanted: Vec<String> = expected.iter().map(ToString::to_string).collect();
        ParseError::at(
            tok.location(),
            format!("expected {}, found {found}", wanted.join(" or ")),
            expected,
        )
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        let tok = self.next();
        if tok.kind == kind {
            Ok(tok)
        } else {
            Err(Self::unexpected(tok, vec![kind]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        Ok(self.expect(TokenKind::Ident)?.lexeme.clone())
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::Comment {
            self.next();
        }
        let tok = self.peek();
        match tok.kind {
            TokenKind::Newline => {
                self.next();
                Ok(())
            }
            TokenKind::Eof => Ok(()),
            _ => Err(Self::unexpected(
                tok,
                vec![TokenKind::Newline, TokenKind::Comment, TokenKind::Eof],
            )),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut program = Program::default();
        loop {
            let tok = self.peek();
            let loc = tok.location();
            match (tok.kind, tok.lexeme.as_str()) {
                (TokenKind::Eof, _) => return Ok(program),
                (TokenKind::Newline | TokenKind::Comment, _) => {
                    self.next();
                    continue;
                }
                (TokenKind::Keyword, "oracle") => {
                    self.next();
                    let name = self.ident()?;
                    self.expect(TokenKind::Equals)?;
                    let kw = self.next();
                    let oracle = match kw.kind {
                        TokenKind::Keyword => kw.lexeme.parse::<OracleFn>().ok(),
                        _ => None,
                    }
                    .ok_or_else(|| {
                        ParseError::at(
                            kw.location(),
                            format!("expected const0, const1, id or not, found {:?}", kw.lexeme),
                            vec![TokenKind::Keyword],
                        )
                    })?;
                    program.oracle_decls.push(OracleDecl { name, oracle, loc });
                }
                (TokenKind::Keyword, "qubit") => {
                    self.next();
                    let qubit = self.ident()?;
                    self.expect(TokenKind::Equals)?;
                    let ket = self.expect(TokenKind::Ket)?;
                    let init = InitialKet::from_spelling(&ket.lexeme).expect("lexer validated ket");
                    program.push(StatementKind::Alloc { qubit, init }, loc);
                }
                (TokenKind::Keyword, "measure") => {
                    self.next();
                    let qubit = self.ident()?;
                    program.push(StatementKind::Measure { qubit }, loc);
                }
                (TokenKind::Gate, "N") => {
                    self.next();
                    self.expect(TokenKind::LBracket)?;
                    let oracle = self.ident()?;
                    self.expect(TokenKind::RBracket)?;
                    let control = self.ident()?;
                    let register = self.ident()?;
                    program.push(
                        StatementKind::Oracle {
                            oracle,
                            control,
                            register,
                        },
                        loc,
                    );
                }
                (TokenKind::Gate, "R") => {
                    self.next();
                    self.expect(TokenKind::LParen)?;
                    let number = self.expect(TokenKind::Number)?;
                    let angle = parse_angle(&number.lexeme).ok_or_else(|| {
                        ParseError::at(
                            number.location(),
                            "angle out of range",
                            vec![TokenKind::Number],
                        )
                    })?;
                    self.expect(TokenKind::RParen)?;
                    let target = self.ident()?;
                    program.push(
                        StatementKind::Apply {
                            gate: GateRef::R(angle),
                            target,
                        },
                        loc,
                    );
                }
                (TokenKind::Gate, name) => {
                    self.next();
                    let gate = match name {
                        "I" => GateRef::I,
                        "X" => GateRef::X,
                        "Z" => GateRef::Z,
                        _ => GateRef::H,
                    };
                    let target = self.ident()?;
                    program.push(StatementKind::Apply { gate, target }, loc);
                }
                _ => {
                    return Err(Self::unexpected(
                        tok,
                        vec![TokenKind::Keyword, TokenKind::Gate],
                    ))
                }
            }
            self.end_of_statement()?;
        }
    }
}

impl Program {
    fn push(&mut self, kind: StatementKind, loc: Location) {
        self.statements.push(Statement { kind, loc });
    }
}

fn parse_angle(lexeme: &str) -> Option<f64> {
    let (neg, body) = match lexeme.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, lexeme),
    };
    let value = match body {
        "pi" => PI,
        "pi/2" => FRAC_PI_2,
        "pi/4" => FRAC_PI_4,
        digits => digits.parse::<f64>().ok()?,
    };
    value
        .is_finite()
        .then_some(if neg { -value } else { value })
}

/// A scoping violation found by [`scope_errors`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeError {
    pub message: String,
    pub loc: Location,
}

impl fmt::Display for ScopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.loc, self.message)
    }
}

/// Qubits must be allocated once before use, and oracles declared before use.
pub fn scope_errors(p: &Program) -> Vec<ScopeError> {
    let mut errors = Vec::new();
    let mut allocated: Vec<&str> = Vec::new();
    for stmt in &p.statements {
        for q in stmt.kind.qubits() {
            if !allocated.contains(&q) {
                errors.push(ScopeError {
                    message: format!("undeclared qubit {q}"),
                    loc: stmt.loc,
                });
            }
        }
        match &stmt.kind {
            StatementKind::Alloc { qubit, .. } => {
                if allocated.contains(&qubit.as_str()) {
                    errors.push(ScopeError {
                        message: format!("qubit {qubit} allocated twice"),
                        loc: stmt.loc,
                    });
                } else {
                    allocated.push(qubit);
                }
            }
            StatementKind::Oracle {
                oracle,
                control,
                register,
            } => {
                let declared = p
                    .oracle_decls
                    .iter()
                    .any(|d| &d.name == oracle && d.loc <= stmt.loc);
                if !declared {
                    errors.push(ScopeError {
                        message: format!("undeclared oracle {oracle}"),
                        loc: stmt.loc,
                    });
                }
                if control == register {
                    errors.push(ScopeError {
                        message: format!("oracle control and register are both {control}"),
                        loc: stmt.loc,
                    });
                }
            }
            _ => {}
        }
    }
    errors
}

/// Grammar-only parse; scoping is not checked.
pub fn parse_syntax(tokens: &[Token]) -> Result<Program, ParseError> {
    if tokens.last().map(|t| t.kind) != Some(TokenKind::Eof) {
        let loc = tokens.last().map(Token::location).unwrap_or_default();
        return Err(ParseError::at(
            loc,
            "token stream must end in EOF",
            vec![TokenKind::Eof],
        ));
    }
    Parser { tokens, pos: 0 }.program()
}

/// Parses and rejects the first scoping violation.
pub fn parse(tokens: &[Token]) -> Result<Program, ParseError> {
    let program = parse_syntax(tokens)?;
    if let Some(e) = scope_errors(&program).into_iter().next() {
        return Err(ParseError::at(e.loc, e.message, vec![]));
    }
    Ok(program)
}

/// `tokenize` followed by `parse`.
pub fn parse_source(source: &str) -> Result<Program, ParseError> {
    parse(&tokenize(source)?)
}

/// Canonical spelling of an angle: a pi fraction when within `1e-12` of one,
/// otherwise nine significant digits.
pub fn format_angle(phi: f64) -> String {
    for (value, text) in [(PI, "pi"), (FRAC_PI_2, "pi/2"), (FRAC_PI_4, "pi/4")] {
        if (phi - value).abs() <= 1e-12 {
            return text.to_string();
        }
        if (phi + value).abs() <= 1e-12 {
            return format!("-{text}");
        }
    }
    format_significant(phi, 9)
}

/// `%.{digits}g`-style formatting.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Canonical text: oracle declarations first, then one statement per line.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.oracle_decls {
        let _ = writeln!(out, "oracle {} = {}", d.name, d.oracle.keyword());
    }
    for s in &p.statements {
        let _ = match &s.kind {
            StatementKind::Alloc { qubit, init } => writeln!(out, "qubit {qubit} = {init}"),
            StatementKind::Apply { gate, target } => match gate {
                GateRef::I => writeln!(out, "I {target}"),
                GateRef::X => writeln!(out, "X {target}"),
                GateRef::Z => writeln!(out, "Z {target}"),
                GateRef::H => writeln!(out, "H {target}"),
                GateRef::R(phi) => writeln!(out, "R({}) {target}", format_angle(*phi)),
            },
            StatementKind::Oracle {
                oracle,
                control,
                register,
            } => writeln!(out, "N[{oracle}] {control} {register}"),
            StatementKind::Measure { qubit } => writeln!(out, "measure {qubit}"),
        };
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("{loc}: oracle {name} declared twice")]
    DuplicateOracle { name: String, loc: Location },
    #[error("{0}")]
    Scope(ScopeError),
    #[error("{loc}: {source}")]
    Gate {
        loc: Location,
        #[source]
        source: GateError,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// One instruction per statement, in order, plus the oracle table.
pub fn compile(p: &Program) -> Result<(Circuit, HashMap<String, OracleFn>), CompileError> {
    let mut oracles = HashMap::new();
    for d in &p.oracle_decls {
        if oracles.insert(d.name.clone(), d.oracle).is_some() {
            return Err(CompileError::DuplicateOracle {
                name: d.name.clone(),
                loc: d.loc,
            });
        }
    }
    if let Some(e) = scope_errors(p).into_iter().next() {
        return Err(CompileError::Scope(e));
    }
    let mut instructions = Vec::with_capacity(p.statements.len());
    for s in &p.statements {
        let instr = match &s.kind {
            StatementKind::Alloc { qubit, init } => Instruction::Alloc {
                qubit: qubit.clone(),
                init: *init,
            },
            StatementKind::Apply { gate, target } => Instruction::Apply {
                gate: gate
                    .to_gate()
                    .map_err(|source| CompileError::Gate { loc: s.loc, source })?,
                targets: vec![target.clone()],
            },
            StatementKind::Oracle {
                oracle,
                control,
                register,
            } => Instruction::ApplyOracle {
                oracle: oracle.clone(),
                control: control.clone(),
                register: register.clone(),
            },
            StatementKind::Measure { qubit } => Instruction::Measure {
                qubit: qubit.clone(),
            },
        };
        instructions.push(instr);
    }
    Ok((Circuit::new(instructions)?, oracles))
}
