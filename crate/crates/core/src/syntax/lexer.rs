//! Tokenizer for ISO-style Prolog text.
//!
//! Tokens keep their exact source slice and byte span; comments are
//! collected on the side so that the gaps between tokens always consist of
//! layout text and comments only.

use super::term::Span;
use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// Unquoted name, symbol-char sequence, solo char (`!`, `;`) or quoted atom.
    Atom,
    Variable,
    Integer,
    Float,
    /// Double- or back-quoted string.
    String,
    /// `(`, `[` or `{`.
    Open,
    /// `)`, `]` or `}`.
    Close,
    Comma,
    Bar,
    /// The terminating `.` of a clause.
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    /// True when whitespace or a comment immediately precedes the token.
    pub layout_before: bool,
}

impl Token {
    pub fn is_open(&self, c: &str) -> bool {
        self.kind == TokenKind::Open && self.text == c
    }

    pub fn is_close(&self, c: &str) -> bool {
        self.kind == TokenKind::Close && self.text == c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub span: Span,
    pub text: String,
}

/// Tokenizes `text`; comments are dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer::new(text).run().map(|(t, _)| t)
}

/// Tokenizes `text`, returning tokens and comments separately.
pub fn tokenize_with_comments(text: &str) -> Result<(Vec<Token>, Vec<Comment>), SyntaxError> {
    Lexer::new(text).run()
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

pub fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

pub fn is_alnum(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    tokens: Vec<Token>,
    comments: Vec<Comment>,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            tokens: Vec::new(),
            comments: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    /// Skips layout and comments; returns whether anything was skipped.
    fn skip_layout(&mut self) -> Result<bool, SyntaxError> {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    let s = self.pos;
                    self.eat_while(|c| c != '\n');
                    self.comments.push(Comment {
                        span: Span::new(s, self.pos),
                        text: self.text[s..self.pos].to_string(),
                    });
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let s = self.pos;
                    match self.text[s + 2..].find("*/") {
                        Some(i) => self.pos = s + 2 + i + 2,
                        None => {
                            return Err(SyntaxError::UnterminatedBlockComment { offset: s });
                        }
                    }
                    self.comments.push(Comment {
                        span: Span::new(s, self.pos),
                        text: self.text[s..self.pos].to_string(),
                    });
                }
                _ => break,
            }
        }
        Ok(self.pos > start)
    }

    fn push(&mut self, kind: TokenKind, start: usize, layout_before: bool) {
        self.tokens.push(Token {
            kind,
            text: self.text[start..self.pos].to_string(),
            span: Span::new(start, self.pos),
            layout_before,
        });
    }

    fn run(mut self) -> Result<(Vec<Token>, Vec<Comment>), SyntaxError> {
        loop {
            let layout = self.skip_layout()? || self.pos == 0;
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            let kind = match c {
                '(' | '[' | '{' => {
                    self.bump();
                    TokenKind::Open
                }
                ')' | ']' | '}' => {
                    self.bump();
                    TokenKind::Close
                }
                ',' => {
                    self.bump();
                    TokenKind::Comma
                }
                '|' if self.peek_at(1) == Some('|') => {
                    self.pos += 2;
                    TokenKind::Atom
                }
                '|' => {
                    self.bump();
                    TokenKind::Bar
                }
                '!' | ';' => {
                    self.bump();
                    TokenKind::Atom
                }
                '\'' => {
                    self.quoted('\'')?;
                    TokenKind::Atom
                }
                '"' | '`' => {
                    self.quoted(c)?;
                    TokenKind::String
                }
                '0'..='9' => self.number()?,
                c if c == '_' || c.is_uppercase() => {
                    self.eat_while(is_alnum);
                    TokenKind::Variable
                }
                c if c.is_alphabetic() => {
                    self.eat_while(is_alnum);
                    TokenKind::Atom
                }
                c if is_symbol_char(c) => {
                    self.eat_while(is_symbol_char);
                    let end_follows = match self.peek() {
                        None => true,
                        Some(n) => n.is_whitespace() || n == '%',
                    };
                    if &self.text[start..self.pos] == "." && end_follows {
                        TokenKind::End
                    } else {
                        TokenKind::Atom
                    }
                }
                _ => return Err(SyntaxError::IllegalCharacter { offset: start, ch: c }),
            };
            self.push(kind, start, layout);
        }
        Ok((self.tokens, self.comments))
    }

    fn quoted(&mut self, q: char) -> Result<(), SyntaxError> {
        let start = self.pos;
        self.bump();
        loop {
            match self.bump() {
                None => return Err(SyntaxError::UnterminatedString { offset: start }),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(SyntaxError::UnterminatedString { offset: start });
                    }
                }
                Some(c) if c == q => {
                    if self.peek() == Some(q) {
                        self.bump();
                    } else {
                        return Ok(());
                    }
                }
                Some(_) => {}
            }
        }
    }

    fn number(&mut self) -> Result<TokenKind, SyntaxError> {
        let start = self.pos;
        if self.peek() == Some('0') {
            match self.peek_at(1) {
                Some('\'') => {
                    self.pos += 2;
                    match self.bump() {
                        Some('\\') => {
                            // escape: consume one char, or an octal/hex group up to a closing '\'
                            match self.bump() {
                                Some('x') | Some('0'..='7') => {
                                    self.eat_while(|c| c.is_ascii_hexdigit());
                                    if self.peek() == Some('\\') {
                                        self.bump();
                                    }
                                }
                                Some(_) => {}
                                None => return Err(SyntaxError::UnterminatedString { offset: start }),
                            }
                        }
                        Some('\'') => {
                            if self.peek() == Some('\'') {
                                self.bump();
                            }
                        }
                        Some(_) => {}
                        None => return Err(SyntaxError::UnterminatedString { offset: start }),
                    }
                    return Ok(TokenKind::Integer);
                }
                Some('x') if self.peek_at(2).is_some_and(|c| c.is_ascii_hexdigit()) => {
                    self.pos += 2;
                    self.eat_while(|c| c.is_ascii_hexdigit());
                    return Ok(TokenKind::Integer);
                }
                Some('o') if self.peek_at(2).is_some_and(|c| ('0'..='7').contains(&c)) => {
                    self.pos += 2;
                    self.eat_while(|c| ('0'..='7').contains(&c));
                    return Ok(TokenKind::Integer);
                }
                Some('b') if self.peek_at(2).is_some_and(|c| c == '0' || c == '1') => {
                    self.pos += 2;
                    self.eat_while(|c| c == '0' || c == '1');
                    return Ok(TokenKind::Integer);
                }
                _ => {}
            }
        }
        self.eat_while(|c| c.is_ascii_digit() || c == '_');
        let mut kind = TokenKind::Integer;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            self.eat_while(|c| c.is_ascii_digit());
            kind = TokenKind::Float;
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) && kind == TokenKind::Float {
                self.eat_while(|c| c.is_ascii_digit());
            } else {
                self.pos = save;
            }
        }
        Ok(kind)
    }
}

/// Decodes the body of a quoted atom or string token (quotes included in `raw`).
pub fn unquote(raw: &str) -> Result<String, String> {
    let mut chars = raw.chars();
    let q = chars.next().ok_or("empty token")?;
    let body: Vec<char> = chars.collect();
    let body = &body[..body.len().saturating_sub(1)];
    let mut out = String::new();
    let mut i = 0;
    while i < body.len() {
        let c = body[i];
        i += 1;
        if c == q {
            // doubled quote
            out.push(q);
            i += 1;
            continue;
        }
        if c != '\\' {
            out.push(c);
            continue;
        }
        let Some(&e) = body.get(i) else {
            return Err("dangling escape".into());
        };
        i += 1;
        match e {
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            'a' => out.push('\x07'),
            'b' => out.push('\x08'),
            'f' => out.push('\x0c'),
            'v' => out.push('\x0b'),
            '0'..='7' | 'x' => {
                let radix = if e == 'x' { 16 } else { 8 };
                let mut digits = String::new();
                if e != 'x' {
                    digits.push(e);
                }
                while let Some(&d) = body.get(i) {
                    if d == '\\' {
                        i += 1;
                        break;
                    }
                    digits.push(d);
                    i += 1;
                }
                let code = u32::from_str_radix(&digits, radix).map_err(|e| e.to_string())?;
                out.push(char::from_u32(code).ok_or("bad code point")?);
            }
            '\n' => {}
            other => out.push(other),
        }
    }
    Ok(out)
}

/// Value of an integer token, including `0'c`, `0x`, `0o` and `0b` forms.
pub fn integer_value(text: &str) -> Option<i64> {
    if let Some(rest) = text.strip_prefix("0'") {
        if rest == "''" {
            return Some('\'' as i64);
        }
        if rest.starts_with('\\') {
            let s = unquote(&format!("'{rest}'")).ok()?;
            return s.chars().next().map(|c| c as i64);
        }
        return rest.chars().next().map(|c| c as i64);
    }
    let (digits, radix) = if let Some(r) = text.strip_prefix("0x") {
        (r.to_string(), 16)
    } else if let Some(r) = text.strip_prefix("0o") {
        (r.to_string(), 8)
    } else if let Some(r) = text.strip_prefix("0b") {
        (r.to_string(), 2)
    } else {
        (text.replace('_', ""), 10)
    };
    i64::from_str_radix(&digits, radix).ok()
}
