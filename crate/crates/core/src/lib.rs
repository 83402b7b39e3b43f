//! Relation-algebra fragments of XPath over unordered node-labeled trees:
//! evaluation, structural equivalences, definability deciders, witness
//! synthesis, semantics-preserving rewrites and a brute-force oracle.

pub mod decide;
pub mod document;
pub mod equiv;
pub mod error;
pub mod eval;
pub mod expr;
pub mod gen;
pub mod oracle;
pub mod rewrite;
pub mod signature;
pub mod synth;

pub use document::{Document, Label, NodeId};
pub use error::{Error, Result};
pub use eval::{eval, eval_from, NodeSet, Relation};
pub use expr::{check_fragment, parse_expr, print_expr, Expr, Family, Fragment, FragmentCheck};
