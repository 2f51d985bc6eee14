//! Rule-based SQL dialect migration with rules learned from expert fixes.

pub mod ast;
pub mod baseline;
pub mod corpus;
pub mod dialect;
pub mod engine;
pub mod error;
pub mod induction;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod server;
pub mod session;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
