//! Relational verification of forall-exists properties by alignment of
//! two programs into a single bi-command.

pub mod assertions;
pub mod gen;
pub mod oracle;
pub mod semantics;
pub mod structure;
pub mod syntax;
pub mod transform;
pub mod translate;
pub mod vcgen;
