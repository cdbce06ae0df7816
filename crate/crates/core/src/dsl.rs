//! Karel DSL front-end: tokenizer, recursive-descent parser and canonical printer.
//!
//! Programs are written as whitespace separated tokens, with block delimiters
//! spelled as single composite tokens (`m(`, `c)`, `w(` ...):
//!
//! ```text
//! DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) m)
//! ```
//!
//! The canonical form produced by [`Program`]'s `Display` impl is the token
//! stream joined by single spaces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `R=n` accepted by the parser.
pub const MAX_REPEAT: u32 = 19;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("unknown token `{lexeme}` at index {index}")]
    UnknownToken { index: usize, lexeme: String },
    #[error("syntax error at token {index}: expected one of {expected:?}, found {found}")]
    Syntax {
        index: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unbalanced block delimiter at token {index}")]
    UnbalancedBracket { index: usize },
}

impl DslError {
    /// Token index the error refers to.
    pub fn position(&self) -> usize {
        match self {
            DslError::UnknownToken { index, .. }
            | DslError::Syntax { index, .. }
            | DslError::UnbalancedBracket { index } => *index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Move,
    TurnLeft,
    TurnRight,
    PutMarker,
    PickMarker,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Move,
        Action::TurnLeft,
        Action::TurnRight,
        Action::PutMarker,
        Action::PickMarker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Move => "move",
            Action::TurnLeft => "turnLeft",
            Action::TurnRight => "turnRight",
            Action::PutMarker => "putMarker",
            Action::PickMarker => "pickMarker",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn from_name(s: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Perception {
    FrontIsClear,
    LeftIsClear,
    RightIsClear,
    MarkersPresent,
    NoMarkersPresent,
}

impl Perception {
    pub const ALL: [Perception; 5] = [
        Perception::FrontIsClear,
        Perception::LeftIsClear,
        Perception::RightIsClear,
        Perception::MarkersPresent,
        Perception::NoMarkersPresent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Perception::FrontIsClear => "frontIsClear",
            Perception::LeftIsClear => "leftIsClear",
            Perception::RightIsClear => "rightIsClear",
            Perception::MarkersPresent => "markersPresent",
            Perception::NoMarkersPresent => "noMarkersPresent",
        }
    }

    fn from_name(s: &str) -> Option<Perception> {
        match s {
            "markerPresent" => Some(Perception::MarkersPresent),
            "noMarkerPresent" => Some(Perception::NoMarkersPresent),
            _ => Perception::ALL.into_iter().find(|p| p.name() == s),
        }
    }
}

impl fmt::Display for Perception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A perception, optionally negated once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub perception: Perception,
    pub negated: bool,
}

impl Condition {
    pub fn new(perception: Perception) -> Self {
        Condition {
            perception,
            negated: false,
        }
    }

    pub fn not(perception: Perception) -> Self {
        Condition {
            perception,
            negated: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Action(Action),
    While { cond: Condition, body: Vec<Stmt> },
    Repeat { count: u32, body: Vec<Stmt> },
    If { cond: Condition, body: Vec<Stmt> },
    IfElse {
        cond: Condition,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
}

/// `DEF run m( ... m)` with its statement sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Def,
    Run,
    MOpen,
    MClose,
    While,
    Repeat,
    If,
    IfElse,
    Else,
    COpen,
    CClose,
    WOpen,
    WClose,
    ROpen,
    RClose,
    IOpen,
    IClose,
    EOpen,
    EClose,
    Not,
    RepeatCount(u32),
    Perception(Perception),
    Action(Action),
}

impl Token {
    fn from_lexeme(s: &str) -> Option<Token> {
        let tok = match s {
            "DEF" => Token::Def,
            "run" => Token::Run,
            "m(" => Token::MOpen,
            "m)" => Token::MClose,
            "WHILE" => Token::While,
            "REPEAT" => Token::Repeat,
            "IF" => Token::If,
            "IFELSE" => Token::IfElse,
            "ELSE" => Token::Else,
            "c(" => Token::COpen,
            "c)" => Token::CClose,
            "w(" => Token::WOpen,
            "w)" => Token::WClose,
            "r(" => Token::ROpen,
            "r)" => Token::RClose,
            "i(" => Token::IOpen,
            "i)" => Token::IClose,
            "e(" => Token::EOpen,
            "e)" => Token::EClose,
            "not" => Token::Not,
            _ => {
                if let Some(n) = s.strip_prefix("R=") {
                    if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) {
                        return None;
                    }
                    return n.parse().ok().map(Token::RepeatCount);
                }
                if let Some(a) = Action::from_name(s) {
                    return Some(Token::Action(a));
                }
                return Perception::from_name(s).map(Token::Perception);
            }
        };
        Some(tok)
    }

    /// Opening delimiters map to the closer that must balance them.
    fn closer(self) -> Option<Token> {
        match self {
            Token::MOpen => Some(Token::MClose),
            Token::COpen => Some(Token::CClose),
            Token::WOpen => Some(Token::WClose),
            Token::ROpen => Some(Token::RClose),
            Token::IOpen => Some(Token::IClose),
            Token::EOpen => Some(Token::EClose),
            _ => None,
        }
    }

    fn is_closer(self) -> bool {
        matches!(
            self,
            Token::MClose
                | Token::CClose
                | Token::WClose
                | Token::RClose
                | Token::IClose
                | Token::EClose
        )
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Def => "DEF",
            Token::Run => "run",
            Token::MOpen => "m(",
            Token::MClose => "m)",
            Token::While => "WHILE",
            Token::Repeat => "REPEAT",
            Token::If => "IF",
            Token::IfElse => "IFELSE",
            Token::Else => "ELSE",
            Token::COpen => "c(",
            Token::CClose => "c)",
            Token::WOpen => "w(",
            Token::WClose => "w)",
            Token::ROpen => "r(",
            Token::RClose => "r)",
            Token::IOpen => "i(",
            Token::IClose => "i)",
            Token::EOpen => "e(",
            Token::EClose => "e)",
            Token::Not => "not",
            Token::RepeatCount(n) => return write!(f, "R={n}"),
            Token::Perception(p) => p.name(),
            Token::Action(a) => a.name(),
        };
        f.write_str(s)
    }
}

/// Splits on ASCII whitespace and maps every lexeme to a token.
pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    text.split_ascii_whitespace()
        .enumerate()
        .map(|(index, lexeme)| {
            Token::from_lexeme(lexeme).ok_or_else(|| DslError::UnknownToken {
                index,
                lexeme: lexeme.to_string(),
            })
        })
        .collect()
}

/// Checks that every block delimiter is closed by its own kind.
fn check_brackets(tokens: &[Token]) -> Result<(), DslError> {
    let mut stack: Vec<Token> = Vec::new();
    for (index, tok) in tokens.iter().enumerate() {
        if let Some(closer) = tok.closer() {
            stack.push(closer);
        } else if tok.is_closer() && stack.pop() != Some(*tok) {
            return Err(DslError::UnbalancedBracket { index });
        }
    }
    if stack.is_empty() {
        Ok(())
    } else {
        Err(DslError::UnbalancedBracket {
            index: tokens.len(),
        })
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn error(&self, expected: Vec<&'static str>) -> DslError {
        DslError::Syntax {
            index: self.pos,
            expected,
            found: self
                .peek()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "end of input".into()),
        }
    }

    fn expect(&mut self, want: Token, name: &'static str) -> Result<(), DslError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(vec![name]))
        }
    }

    fn program(&mut self) -> Result<Program, DslError> {
        self.expect(Token::Def, "DEF")?;
        self.expect(Token::Run, "run")?;
        self.expect(Token::MOpen, "m(")?;
        let body = self.block(Token::MClose, "m)", false)?;
        Ok(Program { body })
    }

    /// Statements up to and including `close`.
    fn block(
        &mut self,
        close: Token,
        close_name: &'static str,
        non_empty: bool,
    ) -> Result<Vec<Stmt>, DslError> {
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Some(t) if t == close => {
                    if non_empty && body.is_empty() {
                        return Err(self.error(vec!["statement"]));
                    }
                    self.pos += 1;
                    return Ok(body);
                }
                Some(t) if t.is_closer() => {
                    return Err(DslError::UnbalancedBracket { index: self.pos });
                }
                None => return Err(DslError::UnbalancedBracket { index: self.pos }),
                Some(_) => body.push(self.stmt(close_name)?),
            }
        }
    }

    fn stmt(&mut self, close_name: &'static str) -> Result<Stmt, DslError> {
        let tok = self.peek();
        match tok {
            Some(Token::Action(a)) => {
                self.pos += 1;
                Ok(Stmt::Action(a))
            }
            Some(Token::While) => {
                self.pos += 1;
                let cond = self.condition()?;
                self.expect(Token::WOpen, "w(")?;
                let body = self.block(Token::WClose, "w)", true)?;
                Ok(Stmt::While { cond, body })
            }
            Some(Token::Repeat) => {
                self.pos += 1;
                let count = match self.peek() {
                    Some(Token::RepeatCount(n)) if (1..=MAX_REPEAT).contains(&n) => n,
                    _ => return Err(self.error(vec!["R=1..R=19"])),
                };
                self.pos += 1;
                self.expect(Token::ROpen, "r(")?;
                let body = self.block(Token::RClose, "r)", true)?;
                Ok(Stmt::Repeat { count, body })
            }
            Some(Token::If) => {
                self.pos += 1;
                let cond = self.condition()?;
                self.expect(Token::IOpen, "i(")?;
                let body = self.block(Token::IClose, "i)", true)?;
                Ok(Stmt::If { cond, body })
            }
            Some(Token::IfElse) => {
                self.pos += 1;
                let cond = self.condition()?;
                self.expect(Token::IOpen, "i(")?;
                let then_body = self.block(Token::IClose, "i)", true)?;
                self.expect(Token::Else, "ELSE")?;
                self.expect(Token::EOpen, "e(")?;
                let else_body = self.block(Token::EClose, "e)", true)?;
                Ok(Stmt::IfElse {
                    cond,
                    then_body,
                    else_body,
                })
            }
            _ => Err(self.error(vec![
                "action", "WHILE", "REPEAT", "IF", "IFELSE", close_name,
            ])),
        }
    }

    fn condition(&mut self) -> Result<Condition, DslError> {
        self.expect(Token::COpen, "c(")?;
        let cond = match self.peek() {
            Some(Token::Perception(p)) => {
                self.pos += 1;
                Condition::new(p)
            }
            Some(Token::Not) => {
                self.pos += 1;
                self.expect(Token::COpen, "c(")?;
                let p = match self.peek() {
                    Some(Token::Perception(p)) => p,
                    _ => return Err(self.error(vec!["perception"])),
                };
                self.pos += 1;
                self.expect(Token::CClose, "c)")?;
                Condition::not(p)
            }
            _ => return Err(self.error(vec!["perception", "not"])),
        };
        self.expect(Token::CClose, "c)")?;
        Ok(cond)
    }
}

/// Parses exactly one `DEF run m( ... m)` program.
pub fn parse(tokens: &[Token]) -> Result<Program, DslError> {
    check_brackets(tokens)?;
    let mut p = Parser { tokens, pos: 0 };
    let program = p.program()?;
    if p.pos != tokens.len() {
        return Err(p.error(vec!["end of input"]));
    }
    Ok(program)
}

/// Parses a listing of one or more consecutive programs, as printed for
/// composed multi-program policies.
pub fn parse_listing(text: &str) -> Result<Vec<Program>, DslError> {
    let tokens = tokenize(text)?;
    check_brackets(&tokens)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
    };
    let mut programs = Vec::new();
    while p.pos < tokens.len() || programs.is_empty() {
        programs.push(p.program()?);
    }
    Ok(programs)
}

fn emit_cond(cond: &Condition, out: &mut Vec<Token>) {
    out.push(Token::COpen);
    if cond.negated {
        out.extend([
            Token::Not,
            Token::COpen,
            Token::Perception(cond.perception),
            Token::CClose,
        ]);
    } else {
        out.push(Token::Perception(cond.perception));
    }
    out.push(Token::CClose);
}

fn emit_block(body: &[Stmt], out: &mut Vec<Token>) {
    for stmt in body {
        match stmt {
            Stmt::Action(a) => out.push(Token::Action(*a)),
            Stmt::While { cond, body } => {
                out.push(Token::While);
                emit_cond(cond, out);
                out.push(Token::WOpen);
                emit_block(body, out);
                out.push(Token::WClose);
            }
            Stmt::Repeat { count, body } => {
                out.extend([Token::Repeat, Token::RepeatCount(*count), Token::ROpen]);
                emit_block(body, out);
                out.push(Token::RClose);
            }
            Stmt::If { cond, body } => {
                out.push(Token::If);
                emit_cond(cond, out);
                out.push(Token::IOpen);
                emit_block(body, out);
                out.push(Token::IClose);
            }
            Stmt::IfElse {
                cond,
                then_body,
                else_body,
            } => {
                out.push(Token::IfElse);
                emit_cond(cond, out);
                out.push(Token::IOpen);
                emit_block(then_body, out);
                out.extend([Token::IClose, Token::Else, Token::EOpen]);
                emit_block(else_body, out);
                out.push(Token::EClose);
            }
        }
    }
}

fn block_len(body: &[Stmt]) -> usize {
    body.iter()
        .map(|s| match s {
            Stmt::Action(_) => 1,
            // WHILE c( h c) w( .. w) / IF c( h c) i( .. i)
            Stmt::While { cond, body } | Stmt::If { cond, body } => {
                cond_len(cond) + 3 + block_len(body)
            }
            Stmt::Repeat { body, .. } => 4 + block_len(body),
            Stmt::IfElse {
                cond,
                then_body,
                else_body,
            } => cond_len(cond) + 6 + block_len(then_body) + block_len(else_body),
        })
        .sum()
}

fn cond_len(cond: &Condition) -> usize {
    if cond.negated {
        6
    } else {
        3
    }
}

impl Program {
    pub fn new(body: Vec<Stmt>) -> Self {
        Program { body }
    }

    /// Straight-line program of primitive actions.
    pub fn from_actions(actions: impl IntoIterator<Item = Action>) -> Self {
        Program {
            body: actions.into_iter().map(Stmt::Action).collect(),
        }
    }

    pub fn tokens(&self) -> Vec<Token> {
        let mut out = vec![Token::Def, Token::Run, Token::MOpen];
        emit_block(&self.body, &mut out);
        out.push(Token::MClose);
        out
    }

    /// Number of tokens in the canonical print.
    pub fn token_length(&self) -> usize {
        4 + block_len(&self.body)
    }

    /// The action sequence if the program contains only primitive actions.
    pub fn as_straight_line(&self) -> Option<Vec<Action>> {
        self.body
            .iter()
            .map(|s| match s {
                Stmt::Action(a) => Some(*a),
                _ => None,
            })
            .collect()
    }

    /// Maximum control-block nesting depth (0 for straight-line code).
    pub fn depth(&self) -> usize {
        fn depth(body: &[Stmt]) -> usize {
            body.iter()
                .map(|s| match s {
                    Stmt::Action(_) => 0,
                    Stmt::While { body, .. } | Stmt::If { body, .. } | Stmt::Repeat { body, .. } => {
                        1 + depth(body)
                    }
                    Stmt::IfElse {
                        then_body,
                        else_body,
                        ..
                    } => 1 + depth(then_body).max(depth(else_body)),
                })
                .max()
                .unwrap_or(0)
        }
        depth(&self.body)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.tokens().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{tok}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(&tokenize(s)?)
    }
}

/// Canonical text of a program.
pub fn print(program: &Program) -> String {
    program.to_string()
}

/// Concatenates program bodies in order.
pub fn compose(programs: &[Program]) -> Program {
    Program {
        body: programs.iter().flat_map(|p| p.body.iter().cloned()).collect(),
    }
}

/// Multi-program listing, one `DEF run` per line.
pub fn print_listing(programs: &[Program]) -> String {
    programs
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn tokenize_smallest_program() {
        let toks = tokenize("DEF run m( move m)").unwrap();
        assert_eq!(
            toks,
            vec![
                Token::Def,
                Token::Run,
                Token::MOpen,
                Token::Action(Action::Move),
                Token::MClose
            ]
        );
    }

    #[test]
    fn tokenize_repeat_counts_whitespace_symbols() {
        let text = "DEF run m( REPEAT R=5 r( move r) m)";
        let toks = tokenize(text).unwrap();
        assert_eq!(toks.len(), 9);
        assert_eq!(toks.len(), text.split_whitespace().count());
        assert_eq!(toks[4], Token::RepeatCount(5));
    }

    #[test]
    fn tokenize_reports_unknown_symbol_position() {
        let err = tokenize("DEF run m( fly m)").unwrap_err();
        assert_eq!(
            err,
            DslError::UnknownToken {
                index: 3,
                lexeme: "fly".into()
            }
        );
        assert!(matches!(
            tokenize("DEF run m( REPEAT R=x r( move r) m)"),
            Err(DslError::UnknownToken { index: 4, .. })
        ));
    }

    #[test]
    fn parse_single_action() {
        assert_eq!(
            p("DEF run m( move m)"),
            Program::new(vec![Stmt::Action(Action::Move)])
        );
    }

    #[test]
    fn parse_negated_condition() {
        let prog = p("DEF run m( IF c( not c( markersPresent c) c) i( move i) m)");
        assert_eq!(
            prog.body,
            vec![Stmt::If {
                cond: Condition::not(Perception::MarkersPresent),
                body: vec![Stmt::Action(Action::Move)],
            }]
        );
    }

    #[test]
    fn parse_accepts_singular_marker_aliases() {
        let prog = p("DEF run m( WHILE c( noMarkerPresent c) w( move w) IF c( markerPresent c) i( pickMarker i) m)");
        assert_eq!(
            prog.to_string(),
            "DEF run m( WHILE c( noMarkersPresent c) w( move w) IF c( markersPresent c) i( pickMarker i) m)"
        );
    }

    #[test]
    fn missing_closer_is_unbalanced() {
        let toks = tokenize("DEF run m( WHILE c( frontIsClear c) w( move m)").unwrap();
        assert!(matches!(parse(&toks), Err(DslError::UnbalancedBracket { .. })));
        let toks = tokenize("DEF run m( move").unwrap();
        assert!(matches!(parse(&toks), Err(DslError::UnbalancedBracket { .. })));
        let toks = tokenize("DEF run m( REPEAT R=2 r( move w) m)").unwrap();
        assert!(matches!(
            parse(&toks),
            Err(DslError::UnbalancedBracket { index: 7 })
        ));
    }

    #[test]
    fn syntax_errors_carry_expected_set() {
        let toks = tokenize("DEF run m( WHILE c( move c) w( move w) m)").unwrap();
        match parse(&toks) {
            Err(DslError::Syntax { index, expected, .. }) => {
                assert_eq!(index, 5);
                assert!(expected.contains(&"perception"));
            }
            other => panic!("unexpected {other:?}"),
        }
        // empty control body
        let toks = tokenize("DEF run m( WHILE c( frontIsClear c) w( w) m)").unwrap();
        assert!(matches!(parse(&toks), Err(DslError::Syntax { index: 8, .. })));
    }

    #[test]
    fn repeat_bounds() {
        assert!("DEF run m( REPEAT R=19 r( move r) m)".parse::<Program>().is_ok());
        for bad in ["R=0", "R=20"] {
            let text = format!("DEF run m( REPEAT {bad} r( move r) m)");
            assert!(matches!(
                text.parse::<Program>(),
                Err(DslError::Syntax { index: 4, .. })
            ));
        }
    }

    #[test]
    fn print_canonical() {
        assert_eq!(
            print(&Program::new(vec![Stmt::Action(Action::Move)])),
            "DEF run m( move m)"
        );
        let text = "DEF run m( IFELSE c( not c( rightIsClear c) c) i( turnLeft putMarker i) ELSE e( putMarker e) m)";
        assert_eq!(p(text).to_string(), text);
    }

    #[test]
    fn token_length_matches_print() {
        assert_eq!(p("DEF run m( move m)").token_length(), 5);
        assert_eq!(p("DEF run m( REPEAT R=5 r( move r) m)").token_length(), 9);
        let prog = p("DEF run m( IFELSE c( not c( rightIsClear c) c) i( turnLeft i) ELSE e( WHILE c( frontIsClear c) w( move w) e) m)");
        assert_eq!(prog.token_length(), prog.tokens().len());
    }

    #[test]
    fn trailing_tokens_rejected() {
        let toks = tokenize("DEF run m( move m) move").unwrap();
        assert!(matches!(parse(&toks), Err(DslError::Syntax { index: 5, .. })));
    }

    #[test]
    fn listing_and_compose() {
        let progs = parse_listing("DEF run m( move m) DEF run m( turnLeft putMarker m)").unwrap();
        assert_eq!(progs.len(), 2);
        assert_eq!(
            compose(&progs).to_string(),
            "DEF run m( move turnLeft putMarker m)"
        );
        assert_eq!(compose(&progs[..1]), progs[0]);
        assert_eq!(print_listing(&progs).lines().count(), 2);
    }
}
