//! A Java-oriented code lexer.
//!
//! The lexer is deliberately permissive: it never rejects input in lenient
//! mode, it does not need the code to compile, and every character of the
//! input is either consumed by a token or discarded as whitespace. Tokens at
//! this granularity (one token per identifier, literal, operator, or
//! punctuation mark) are the unit for exact-match and edit-distance metrics.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Operator,
    Punct,
    Keyword,
    Comment,
}

/// A single lexed token with its source byte span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind, start: usize, end: usize) -> Self {
        Token {
            text: text.into(),
            kind,
            start,
            end,
        }
    }
}

/// An ordered sequence of tokens.
///
/// Joining the token texts with single spaces and lexing again yields an
/// identical sequence; line comments and unterminated literals keep their
/// line terminator in the token text so that this round trip holds for every
/// input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    /// Token texts in order.
    pub fn texts(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }

    /// Token texts joined with single spaces.
    pub fn joined(&self) -> String {
        let texts: Vec<&str> = self.tokens.iter().map(|t| t.text.as_str()).collect();
        texts.join(" ")
    }
}

impl From<Vec<Token>> for TokenSequence {
    fn from(tokens: Vec<Token>) -> Self {
        TokenSequence::new(tokens)
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Lexer configuration.
///
/// The only built-in language profile is Java-like: identifiers may contain
/// letters, digits, `_`, and `$`; integer and float literals are single
/// tokens; string and char literals are single tokens including their
/// quotes; multi-character operators are matched maximal-munch; each
/// punctuation mark is its own token.
#[derive(Debug, Clone)]
pub struct LexerProfile {
    pub name: &'static str,
    keywords: HashSet<&'static str>,
    /// Drop comment tokens instead of keeping them.
    pub drop_comments: bool,
    /// Error on unterminated literals instead of recovering.
    pub strict: bool,
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "false",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "null",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "true",
    "try",
    "void",
    "volatile",
    "while",
];

// Longest first so maximal munch falls out of a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", ">>=", "<<=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>", "->", "::", "+", "-", "*", "/", "%", "=", "<", ">",
    "!", "&", "|", "^", "~", "?", ":",
];

impl LexerProfile {
    /// The Java-like profile with comments kept and lenient recovery.
    pub fn java() -> Self {
        LexerProfile {
            name: "java",
            keywords: JAVA_KEYWORDS.iter().copied().collect(),
            drop_comments: false,
            strict: false,
        }
    }

    pub fn with_drop_comments(mut self, drop: bool) -> Self {
        self.drop_comments = drop;
        self
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    fn is_keyword(&self, text: &str) -> bool {
        self.keywords.contains(text)
    }
}

impl Default for LexerProfile {
    fn default() -> Self {
        LexerProfile::java()
    }
}

/// The input text as an ordered list of Unicode scalar values.
pub fn char_sequence(text: &str) -> Vec<char> {
    text.chars().collect()
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    profile: &'a LexerProfile,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, profile: &'a LexerProfile) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            profile,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn byte_offset(&self, pos: usize) -> usize {
        self.chars
            .get(pos)
            .map(|&(o, _)| o)
            .unwrap_or(self.src.len())
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        &self.src[self.byte_offset(from)..self.byte_offset(to)]
    }

    fn token(&self, kind: TokenKind, from: usize, to: usize) -> Token {
        Token {
            text: self.slice(from, to).to_string(),
            kind,
            start: self.byte_offset(from),
            end: self.byte_offset(to),
        }
    }

    /// Consume a line terminator at `self.pos`, if present.
    fn eat_line_terminator(&mut self) {
        match self.peek(0) {
            Some('\n') => self.pos += 1,
            Some('\r') => {
                self.pos += 1;
                if self.peek(0) == Some('\n') {
                    self.pos += 1;
                }
            }
            _ => {}
        }
    }

    fn lex_number(&mut self) -> Token {
        let start = self.pos;
        if self.peek(0) == Some('0')
            && matches!(self.peek(1), Some('x') | Some('X'))
            && self.peek(2).is_some_and(|c| c.is_ascii_hexdigit())
        {
            self.pos += 2;
            while self
                .peek(0)
                .is_some_and(|c| c.is_ascii_hexdigit() || c == '_')
            {
                self.pos += 1;
            }
            if matches!(self.peek(0), Some('l') | Some('L')) {
                self.pos += 1;
            }
            return self.token(TokenKind::Number, start, self.pos);
        }
        if self.peek(0) == Some('0')
            && matches!(self.peek(1), Some('b') | Some('B'))
            && matches!(self.peek(2), Some('0') | Some('1'))
        {
            self.pos += 2;
            while self.peek(0).is_some_and(|c| matches!(c, '0' | '1' | '_')) {
                self.pos += 1;
            }
            if matches!(self.peek(0), Some('l') | Some('L')) {
                self.pos += 1;
            }
            return self.token(TokenKind::Number, start, self.pos);
        }

        while self.peek(0).is_some_and(|c| c.is_ascii_digit() || c == '_') {
            self.pos += 1;
        }
        // A dot joins the literal only when a digit follows it.
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            while self.peek(0).is_some_and(|c| c.is_ascii_digit() || c == '_') {
                self.pos += 1;
            }
        }
        if matches!(self.peek(0), Some('e') | Some('E')) {
            let mut ahead = 1;
            if matches!(self.peek(ahead), Some('+') | Some('-')) {
                ahead += 1;
            }
            if self.peek(ahead).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += ahead;
                while self.peek(0).is_some_and(|c| c.is_ascii_digit() || c == '_') {
                    self.pos += 1;
                }
            }
        }
        if matches!(
            self.peek(0),
            Some('l') | Some('L') | Some('f') | Some('F') | Some('d') | Some('D')
        ) {
            self.pos += 1;
        }
        self.token(TokenKind::Number, start, self.pos)
    }

    /// Lex a quoted literal. On a missing closing quote, lenient mode keeps
    /// the remainder of the line (including its terminator, so respacing the
    /// token stream re-lexes identically) and logs a warning.
    fn lex_quoted(&mut self, quote: char, kind: TokenKind, name: &'static str) -> Result<Token> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                Some('\\') => {
                    self.pos += 1;
                    if self.peek(0).is_some() {
                        self.pos += 1;
                    }
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(self.token(kind, start, self.pos));
                }
                Some('\n') | Some('\r') | None => {
                    if self.profile.strict {
                        return Err(Error::UnterminatedLiteral {
                            kind: name,
                            offset: self.byte_offset(start),
                        });
                    }
                    self.eat_line_terminator();
                    let token = self.token(kind, start, self.pos);
                    log::warn!(
                        "unterminated {} literal at byte {}; kept as one token",
                        name,
                        token.start
                    );
                    return Ok(token);
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn lex_line_comment(&mut self) -> Token {
        let start = self.pos;
        while !matches!(self.peek(0), Some('\n') | Some('\r') | None) {
            self.pos += 1;
        }
        // Keep the terminator in the token text; a respaced stream then
        // cannot swallow following tokens into the comment.
        self.eat_line_terminator();
        self.token(TokenKind::Comment, start, self.pos)
    }

    fn lex_block_comment(&mut self) -> Result<Token> {
        let start = self.pos;
        self.pos += 2;
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some('*'), Some('/')) => {
                    self.pos += 2;
                    return Ok(self.token(TokenKind::Comment, start, self.pos));
                }
                (None, _) => {
                    if self.profile.strict {
                        return Err(Error::UnterminatedLiteral {
                            kind: "comment",
                            offset: self.byte_offset(start),
                        });
                    }
                    let token = self.token(TokenKind::Comment, start, self.pos);
                    log::warn!(
                        "unterminated block comment at byte {}; kept as one token",
                        token.start
                    );
                    return Ok(token);
                }
                _ => self.pos += 1,
            }
        }
    }

    fn lex_operator_or_punct(&mut self) -> Token {
        let c = self.peek(0).expect("caller checked");
        if matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ';' | ',' | '.' | '@') {
            let start = self.pos;
            self.pos += 1;
            return self.token(TokenKind::Punct, start, self.pos);
        }
        let rest = &self.src[self.byte_offset(self.pos)..];
        for op in OPERATORS {
            if rest.starts_with(op) {
                let start = self.pos;
                self.pos += op.chars().count();
                return self.token(TokenKind::Operator, start, self.pos);
            }
        }
        // Anything unrecognized is a single-character punctuation token.
        let start = self.pos;
        self.pos += 1;
        self.token(TokenKind::Punct, start, self.pos)
    }

    fn run(&mut self) -> Result<Vec<Token>> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            let token = if is_ident_start(c) {
                let start = self.pos;
                self.pos += 1;
                while self.peek(0).is_some_and(is_ident_continue) {
                    self.pos += 1;
                }
                let mut token = self.token(TokenKind::Ident, start, self.pos);
                if self.profile.is_keyword(&token.text) {
                    token.kind = TokenKind::Keyword;
                }
                token
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek(1).is_some_and(|n| n.is_ascii_digit()))
            {
                self.lex_number()
            } else if c == '"' {
                self.lex_quoted('"', TokenKind::Str, "string")?
            } else if c == '\'' {
                self.lex_quoted('\'', TokenKind::Char, "char")?
            } else if c == '/' && self.peek(1) == Some('/') {
                self.lex_line_comment()
            } else if c == '/' && self.peek(1) == Some('*') {
                self.lex_block_comment()?
            } else {
                self.lex_operator_or_punct()
            };
            if token.kind == TokenKind::Comment && self.profile.drop_comments {
                continue;
            }
            tokens.push(token);
        }
        Ok(tokens)
    }
}

/// Lex `code` under `profile` into a deterministic token stream.
/// Whitespace is discarded; comments are kept as single tokens unless the
/// profile drops them.
pub fn lex(code: &str, profile: &LexerProfile) -> Result<TokenSequence> {
    Lexer::new(code, profile).run().map(TokenSequence::new)
}
