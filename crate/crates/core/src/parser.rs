//! Recursive-descent parser for the process syntax.
//!
//! ```text
//! proc   ::= "0" | act "." proc | proc "|" proc | "(" proc ")"
//! act    ::= ident | "~" ident
//! ident  ::= [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! Whitespace is insignificant, `#` starts a line comment, prefixing binds
//! tighter than `|`, and `|` associates to the right.

use std::fmt;

use crate::process::{Action, Name, Process};

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Zero,
    Tilde,
    Dot,
    Bar,
    LParen,
    RParen,
    Ident(String),
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Zero => f.write_str("'0'"),
            Token::Tilde => f.write_str("'~'"),
            Token::Dot => f.write_str("'.'"),
            Token::Bar => f.write_str("'|'"),
            Token::LParen => f.write_str("'('"),
            Token::RParen => f.write_str("')'"),
            Token::Ident(s) => write!(f, "identifier '{s}'"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'#' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    /// Next token plus the position where it starts.
    fn next_token(&mut self) -> Result<(Token, u32, u32), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok((Token::Eof, line, col));
        };
        let tok = match c {
            b'0' => {
                self.bump();
                Token::Zero
            }
            b'~' => {
                self.bump();
                Token::Tilde
            }
            b'.' => {
                self.bump();
                Token::Dot
            }
            b'|' => {
                self.bump();
                Token::Bar
            }
            b'(' => {
                self.bump();
                Token::LParen
            }
            b')' => {
                self.bump();
                Token::RParen
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Token::Ident(text.to_string())
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character {:?}", other as char),
                })
            }
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token,
    line: u32,
    col: u32,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (current, line, col) = lexer.next_token()?;
        Ok(Parser {
            lexer,
            current,
            line,
            col,
        })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, line, col) = self.lexer.next_token()?;
        self.current = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message,
        }
    }

    fn expect(&mut self, tok: Token) -> Result<(), ParseError> {
        if self.current == tok {
            self.advance()
        } else {
            Err(self.error(format!("expected {}, found {}", tok, self.current)))
        }
    }

    /// par := prefix ("|" par)?   (right-associative)
    fn parse_par(&mut self) -> Result<Process, ParseError> {
        let left = self.parse_prefix()?;
        if self.current == Token::Bar {
            self.advance()?;
            let right = self.parse_par()?;
            Ok(Process::par(left, right))
        } else {
            Ok(left)
        }
    }

    /// prefix := "0" | "(" par ")" | act "." prefix
    fn parse_prefix(&mut self) -> Result<Process, ParseError> {
        match self.current.clone() {
            Token::Zero => {
                self.advance()?;
                Ok(Process::Inert)
            }
            Token::LParen => {
                self.advance()?;
                let inner = self.parse_par()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Tilde => {
                self.advance()?;
                let name = self.parse_ident()?;
                self.expect(Token::Dot)?;
                let cont = self.parse_prefix()?;
                Ok(Process::prefix(Action::output(name), cont))
            }
            Token::Ident(id) => {
                self.advance()?;
                let name = Name::new(id).expect("lexer produced a valid identifier");
                self.expect(Token::Dot)?;
                let cont = self.parse_prefix()?;
                Ok(Process::prefix(Action::input(name), cont))
            }
            other => Err(self.error(format!("expected a process, found {other}"))),
        }
    }

    fn parse_ident(&mut self) -> Result<Name, ParseError> {
        match self.current.clone() {
            Token::Ident(id) => {
                self.advance()?;
                Ok(Name::new(id).expect("lexer produced a valid identifier"))
            }
            other => Err(self.error(format!("expected an identifier, found {other}"))),
        }
    }
}

/// Parses a single process from the given source text.
pub fn parse(text: &str) -> Result<Process, ParseError> {
    let mut parser = Parser::new(text)?;
    let proc = parser.parse_par()?;
    if parser.current != Token::Eof {
        return Err(parser.error(format!("expected end of input, found {}", parser.current)));
    }
    Ok(proc)
}

/// Splits a source file into chunks separated by blank lines and parses each
/// chunk that contains any tokens. Comment-only chunks are skipped.
pub fn parse_file(text: &str) -> Vec<Result<Process, ParseError>> {
    let mut out = Vec::new();
    let mut chunk = String::new();
    let mut chunk_start_line = 1u32;
    let mut line_no = 0u32;
    let flush =
        |chunk: &mut String, start_line: u32, out: &mut Vec<Result<Process, ParseError>>| {
            if !chunk_is_blank(chunk) {
                out.push(parse(chunk).map_err(|e| ParseError {
                    line: e.line + start_line - 1,
                    col: e.col,
                    message: e.message,
                }));
            }
            chunk.clear();
        };
    for line in text.lines() {
        line_no += 1;
        if line.trim().is_empty() {
            flush(&mut chunk, chunk_start_line, &mut out);
            chunk_start_line = line_no + 1;
        } else {
            if chunk.is_empty() {
                chunk_start_line = line_no;
            }
            chunk.push_str(line);
            chunk.push('\n');
        }
    }
    flush(&mut chunk, chunk_start_line, &mut out);
    out
}

/// True when the chunk lexes to nothing (whitespace and comments only).
fn chunk_is_blank(chunk: &str) -> bool {
    let mut lexer = Lexer::new(chunk);
    matches!(lexer.next_token(), Ok((Token::Eof, _, _)))
}
