//! Tokenizer for document files.
//!
//! Identifiers are maximal runs of characters that are not whitespace, not
//! one of the punctuation characters `{ } ( ) [ ] ; : , = .`, not `"`, and
//! not part of the arrow `->`.  `//` starts a comment running to the end of
//! the line.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Equals,
    Arrow,
    Dot,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident => "identifier",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::Semi => "`;`",
            TokenKind::Colon => "`:`",
            TokenKind::Comma => "`,`",
            TokenKind::Equals => "`=`",
            TokenKind::Arrow => "`->`",
            TokenKind::Dot => "`.`",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub col: usize,
}

fn is_ident_char(c: char) -> bool {
    !c.is_whitespace() && !"{}()[];:,=./\"".contains(c) && c != '-' && c != '>'
}

pub fn lex(input: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            let start_col = col;
            chars.next();
            col += 1;
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
                continue;
            }
            return Err(LexError {
                message: "stray `/` (comments start with `//`)".into(),
                line,
                col: start_col,
            });
        }
        let single = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ';' => Some(TokenKind::Semi),
            ':' => Some(TokenKind::Colon),
            ',' => Some(TokenKind::Comma),
            '=' => Some(TokenKind::Equals),
            '.' => Some(TokenKind::Dot),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, text: c.to_string(), line, col });
            chars.next();
            col += 1;
            continue;
        }
        if c == '-' {
            let start_col = col;
            chars.next();
            col += 1;
            if chars.peek() == Some(&'>') {
                chars.next();
                col += 1;
                tokens.push(Token { kind: TokenKind::Arrow, text: "->".into(), line, col: start_col });
                continue;
            }
            return Err(LexError { message: "expected `->`".into(), line, col: start_col });
        }
        if c == '>' || c == '"' {
            return Err(LexError { message: format!("unexpected `{c}`"), line, col });
        }
        let start_col = col;
        let mut text = String::new();
        while let Some(&c) = chars.peek() {
            if is_ident_char(c) {
                text.push(c);
                chars.next();
                col += 1;
            } else {
                break;
            }
        }
        debug_assert!(!text.is_empty());
        tokens.push(Token { kind: TokenKind::Ident, text, line, col: start_col });
    }
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), line, col });
    Ok(tokens)
}
