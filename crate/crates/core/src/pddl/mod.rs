//! Reader for the PDDL subset used by both experiment domains: STRIPS with
//! typing, negative preconditions, and integer-valued numeric fluents.
//!
//! Grammar summary (symbols are case-insensitive):
//!
//! ```text
//! domain   := (define (domain NAME) section*)
//! section  := (:requirements REQ*) | (:types TYPED*) | (:predicates SIG*)
//!           | (:functions SIG*) | (:action NAME :parameters (TYPED*)
//!                                   :precondition COND :effect EFF)
//! COND     := (and COND*) | ATOM | (not ATOM) | (CMP NEXP NEXP)
//! EFF      := (and EFF*) | ATOM | (not ATOM) | (increase|decrease|assign FLUENT NEXP)
//! NEXP     := INTEGER | FLUENT | (+ NEXP NEXP) | (- NEXP NEXP)
//! CMP      := = | < | <= | > | >=
//!
//! problem  := (define (problem NAME) (:domain NAME) (:objects TYPED*)
//!              (:init (ATOM | (= FLUENT INTEGER))*)
//!              ((:goal GOAL) | (:goals (LABEL GOAL)*)) (:goal-prior (LABEL P)*)?)
//! GOAL     := (and ATOM*) | ATOM
//! ```

mod ast;
mod parser;
mod sexpr;

pub use ast::*;
pub use parser::{parse_domain, parse_problem};
pub use sexpr::Pos;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported PDDL feature `{feature}`")]
    Unsupported { feature: String },
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("undeclared function `{0}`")]
    UndeclaredFunction(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("invalid definition: {0}")]
    Invalid(String),
}

pub const DOORS_KEYS_GEMS_DOMAIN: &str = include_str!("../../data/domains/doors-keys-gems.pddl");
pub const BLOCK_WORDS_DOMAIN: &str = include_str!("../../data/domains/block-words.pddl");
