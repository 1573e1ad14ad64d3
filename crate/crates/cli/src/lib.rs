//! Document language and command-line front end for the tree machinery.
//!
//! A document is a sequence of declarations — signatures, coalgebras,
//! indexed signatures, proto-coalgebras, categories, presheaves, presheaf
//! morphisms, sites and compatible families — that bind in order.  The
//! `mtypes` binary loads one document per invocation and runs a single
//! command against it.

pub mod ast;
pub mod doc;
pub mod emit;
pub mod lex;
pub mod parse;
pub mod run;

pub use run::{run, Cli};
