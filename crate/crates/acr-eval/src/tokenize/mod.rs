//! Code tokenization and the two vocabulary-reduction strategies used by
//! code-revision generators: identifier/literal abstraction and byte-pair
//! encoding. Character sequences for character-level metrics live here too.

pub mod abstraction;
pub mod bpe;
pub mod lexer;

pub use abstraction::{abstract_code, deabstract, AbstractionMap, Category};
pub use bpe::{BpeModel, END_OF_TOKEN};
pub use lexer::{char_sequence, lex, LexerProfile, Token, TokenKind, TokenSequence};
