//! Identifier/literal abstraction.
//!
//! Replaces concrete identifiers and literals with typed reusable IDs
//! (`VAR_1`, `METHOD_2`, `STRING_1`, ...) so that a vocabulary shrinks to a
//! small closed set. The category of an identifier is inferred with a purely
//! syntactic neighbor rule, documented on [`abstract_code`]; no parsing or
//! type resolution is attempted.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::lexer::{Token, TokenKind, TokenSequence};

/// Abstraction bucket. Each category numbers its IDs independently,
/// starting at 1, in first-occurrence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Var,
    Method,
    Type,
    Int,
    Str,
    Char,
}

impl Category {
    pub fn prefix(self) -> &'static str {
        match self {
            Category::Var => "VAR",
            Category::Method => "METHOD",
            Category::Type => "TYPE",
            Category::Int => "INT",
            Category::Str => "STRING",
            Category::Char => "CHAR",
        }
    }

    const ALL: [Category; 6] = [
        Category::Var,
        Category::Method,
        Category::Type,
        Category::Int,
        Category::Str,
        Category::Char,
    ];
}

/// Bidirectional mapping between original token texts and reusable IDs for
/// one instance (optionally shared between the submitted and revised version
/// of the same code so both sides agree on numbering).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AbstractionMap {
    forward: HashMap<(Category, String), String>,
    reverse: HashMap<String, (String, TokenKind)>,
    next_index: HashMap<Category, usize>,
}

impl AbstractionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    /// The original text and kind behind an ID, if assigned.
    pub fn original(&self, id: &str) -> Option<(&str, TokenKind)> {
        self.reverse.get(id).map(|(t, k)| (t.as_str(), *k))
    }

    fn assign(&mut self, category: Category, text: &str, kind: TokenKind) -> String {
        if let Some(id) = self.forward.get(&(category, text.to_string())) {
            return id.clone();
        }
        let n = self.next_index.entry(category).or_insert(1);
        let id = format!("{}_{}", category.prefix(), n);
        *n += 1;
        self.forward
            .insert((category, text.to_string()), id.clone());
        self.reverse.insert(id.clone(), (text.to_string(), kind));
        id
    }
}

/// Parse a canonical abstraction ID (`CATEGORY_n`, n >= 1, no leading zero).
fn parse_id(text: &str) -> Option<Category> {
    for category in Category::ALL {
        if let Some(rest) = text
            .strip_prefix(category.prefix())
            .and_then(|r| r.strip_prefix('_'))
        {
            if !rest.is_empty()
                && !rest.starts_with('0')
                && rest.bytes().all(|b| b.is_ascii_digit())
            {
                return Some(category);
            }
        }
    }
    None
}

fn neighbor<'a>(
    tokens: &'a [Token],
    index: usize,
    step: impl Fn(usize) -> Option<usize>,
) -> Option<&'a Token> {
    let mut i = index;
    loop {
        i = step(i)?;
        let t = tokens.get(i)?;
        if t.kind != TokenKind::Comment {
            return Some(t);
        }
    }
}

/// Infer the category of an identifier from its immediate non-comment
/// neighbors:
///
/// - previous token is `new`      -> TYPE (constructor names are types)
/// - next token is `(`            -> METHOD
/// - next token is an identifier  -> TYPE (declaration-like position)
/// - otherwise                    -> VAR
fn infer_category(tokens: &[Token], index: usize) -> Category {
    let prev = neighbor(tokens, index, |i| i.checked_sub(1));
    if prev.is_some_and(|t| t.kind == TokenKind::Keyword && t.text == "new") {
        return Category::Type;
    }
    let next = neighbor(tokens, index, |i| i.checked_add(1));
    if next.is_some_and(|t| t.text == "(") {
        return Category::Method;
    }
    if next.is_some_and(|t| t.kind == TokenKind::Ident) {
        return Category::Type;
    }
    Category::Var
}

/// Replace identifiers and literals in `seq` with reusable IDs, extending
/// `map`. Repeated originals reuse their ID; keywords, operators,
/// punctuation, and comments pass through unchanged.
pub fn abstract_code(seq: &TokenSequence, map: &AbstractionMap) -> (TokenSequence, AbstractionMap) {
    let mut map = map.clone();
    let tokens = seq.tokens();
    let out = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let category = match t.kind {
                TokenKind::Ident => infer_category(tokens, i),
                TokenKind::Number => Category::Int,
                TokenKind::Str => Category::Str,
                TokenKind::Char => Category::Char,
                _ => return t.clone(),
            };
            let id = map.assign(category, &t.text, t.kind);
            Token::new(id, TokenKind::Ident, t.start, t.end)
        })
        .collect();
    (TokenSequence::new(out), map)
}

/// Restore the originals behind every abstraction ID in `seq`. Tokens that
/// do not look like IDs pass through unchanged; an ID with no entry in the
/// map is an error (the situation a generator hits when the revised code
/// needs tokens that never occurred in its input).
pub fn deabstract(seq: &TokenSequence, map: &AbstractionMap) -> Result<TokenSequence> {
    let out: Result<Vec<Token>> = seq
        .iter()
        .map(|t| {
            if t.kind == TokenKind::Ident && parse_id(&t.text).is_some() {
                match map.original(&t.text) {
                    Some((text, kind)) => Ok(Token::new(text, kind, t.start, t.end)),
                    None => Err(Error::UnknownAbstractionId { id: t.text.clone() }),
                }
            } else {
                Ok(t.clone())
            }
        })
        .collect();
    Ok(TokenSequence::new(out?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::lexer::{lex, LexerProfile};

    fn abstracted(code: &str) -> (TokenSequence, AbstractionMap) {
        let seq = lex(code, &LexerProfile::java()).unwrap();
        abstract_code(&seq, &AbstractionMap::new())
    }

    #[test]
    fn first_variable_becomes_var_1() {
        let (seq, _) = abstracted("int total = 0;");
        assert_eq!(seq.texts(), ["int", "VAR_1", "=", "INT_1", ";"]);
    }

    #[test]
    fn repeated_identifier_reuses_id() {
        let (seq, _) = abstracted("x = x + y;");
        assert_eq!(seq.texts(), ["VAR_1", "=", "VAR_1", "+", "VAR_2", ";"]);
    }

    #[test]
    fn string_literals_number_in_first_occurrence_order() {
        let (seq, _) = abstracted(r#"f("a", "b", "c", "a");"#);
        assert_eq!(
            seq.texts(),
            [
                "METHOD_1", "(", "STRING_1", ",", "STRING_2", ",", "STRING_3", ",", "STRING_1",
                ")", ";"
            ]
        );
    }

    #[test]
    fn category_inference() {
        let (seq, _) = abstracted("Foo bar = new Foo(); bar.run();");
        assert_eq!(
            seq.texts(),
            [
                "TYPE_1", "VAR_1", "=", "new", "TYPE_1", "(", ")", ";", "VAR_1", ".", "METHOD_1",
                "(", ")", ";"
            ]
        );
    }

    #[test]
    fn round_trip_restores_texts_and_kinds() {
        let src = "double d = hypot(3.5, y) + \"s\";";
        let seq = lex(src, &LexerProfile::java()).unwrap();
        let (abs, map) = abstract_code(&seq, &AbstractionMap::new());
        let back = deabstract(&abs, &map).unwrap();
        assert_eq!(back.texts(), seq.texts());
        let kinds: Vec<_> = back.iter().map(|t| t.kind).collect();
        let orig: Vec<_> = seq.iter().map(|t| t.kind).collect();
        assert_eq!(kinds, orig);
    }

    #[test]
    fn unknown_id_is_an_error() {
        let (_, map) = abstracted("int x;");
        let stray = TokenSequence::new(vec![Token::new("VAR_9", TokenKind::Ident, 0, 5)]);
        let err = deabstract(&stray, &map).unwrap_err();
        assert!(matches!(err, Error::UnknownAbstractionId { id } if id == "VAR_9"));
    }

    #[test]
    fn empty_sequence_round_trips() {
        let empty = TokenSequence::default();
        let (abs, map) = abstract_code(&empty, &AbstractionMap::new());
        assert!(abs.is_empty());
        assert!(deabstract(&abs, &map).unwrap().is_empty());
    }

    #[test]
    fn shared_map_keeps_numbering_across_versions() {
        let before = lex("a = b;", &LexerProfile::java()).unwrap();
        let after = lex("b = a;", &LexerProfile::java()).unwrap();
        let (abs_before, map) = abstract_code(&before, &AbstractionMap::new());
        let (abs_after, _) = abstract_code(&after, &map);
        assert_eq!(abs_before.texts(), ["VAR_1", "=", "VAR_2", ";"]);
        assert_eq!(abs_after.texts(), ["VAR_2", "=", "VAR_1", ";"]);
    }
}
