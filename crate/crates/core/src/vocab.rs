//! Fixed token vocabulary shared by datasets and learned decoders.
//!
//! Ids 0 and 1 are reserved for padding and end-of-program; program tokens
//! follow in a fixed order. The order never changes within a version.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{parse, tokenize, Action, DslError, Perception, Program, Token, MAX_REPEAT};

pub const VOCAB_VERSION: u32 = 1;
pub const PAD: &str = "<pad>";
pub const EOS: &str = "<eos>";
pub const PAD_ID: u32 = 0;
pub const EOS_ID: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("reserved id {0} inside a program")]
    Reserved(u32),
    #[error("vocabulary version {found} does not match {expected}")]
    Version { expected: u32, found: u32 },
    #[error("vocabulary file differs from the built-in table")]
    Mismatch,
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("bad vocabulary file: {0}")]
    Format(String),
}

/// Serialized form: `tokens[id]` is the lexeme for `id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabFile {
    pub version: u32,
    pub size: usize,
    pub tokens: Vec<String>,
}

fn program_tokens() -> Vec<Token> {
    let mut v = vec![
        Token::Def,
        Token::Run,
        Token::MOpen,
        Token::MClose,
        Token::While,
        Token::Repeat,
        Token::If,
        Token::IfElse,
        Token::Else,
        Token::COpen,
        Token::CClose,
        Token::WOpen,
        Token::WClose,
        Token::ROpen,
        Token::RClose,
        Token::IOpen,
        Token::IClose,
        Token::EOpen,
        Token::EClose,
        Token::Not,
    ];
    v.extend((1..=MAX_REPEAT).map(Token::RepeatCount));
    v.extend(Perception::ALL.map(Token::Perception));
    v.extend(Action::ALL.map(Token::Action));
    v
}

fn lexemes() -> &'static [String] {
    static TABLE: OnceLock<Vec<String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = vec![PAD.to_string(), EOS.to_string()];
        v.extend(program_tokens().iter().map(|t| t.to_string()));
        v
    })
}

pub fn size() -> usize {
    lexemes().len()
}

pub fn vocab_file() -> VocabFile {
    VocabFile {
        version: VOCAB_VERSION,
        size: size(),
        tokens: lexemes().to_vec(),
    }
}

/// Checks a loaded vocabulary file against the built-in table.
pub fn check_file(file: &VocabFile) -> Result<(), VocabError> {
    if file.version != VOCAB_VERSION {
        return Err(VocabError::Version {
            expected: VOCAB_VERSION,
            found: file.version,
        });
    }
    if file.size != file.tokens.len() || file.tokens != lexemes() {
        return Err(VocabError::Mismatch);
    }
    Ok(())
}

pub fn load(json: &str) -> Result<VocabFile, VocabError> {
    let file: VocabFile = serde_json::from_str(json).map_err(|e| VocabError::Format(e.to_string()))?;
    check_file(&file)?;
    Ok(file)
}

pub fn token_id(lexeme: &str) -> Result<u32, VocabError> {
    lexemes()
        .iter()
        .position(|t| t == lexeme)
        .map(|i| i as u32)
        .ok_or_else(|| VocabError::UnknownToken(lexeme.to_string()))
}

pub fn lexeme(id: u32) -> Result<&'static str, VocabError> {
    lexemes()
        .get(id as usize)
        .map(String::as_str)
        .ok_or(VocabError::UnknownId(id))
}

/// Ids of the canonical token stream; one id per token.
pub fn encode_tokens(program: &Program) -> Vec<u32> {
    program
        .tokens()
        .iter()
        .map(|t| token_id(&t.to_string()).expect("every printable token is in the table"))
        .collect()
}

/// Lexemes for `ids`, stopping at the first end-of-program id. Padding after
/// that point is ignored.
pub fn decode_tokens(ids: &[u32]) -> Result<Vec<&'static str>, VocabError> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        match id {
            EOS_ID => break,
            PAD_ID => return Err(VocabError::Reserved(id)),
            _ => out.push(lexeme(id)?),
        }
    }
    Ok(out)
}

pub fn decode_program(ids: &[u32]) -> Result<Program, VocabError> {
    let text = decode_tokens(ids)?.join(" ");
    Ok(parse(&tokenize(&text)?)?)
}
