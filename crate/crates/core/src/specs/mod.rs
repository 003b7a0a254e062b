//! Query specifications: automata, grammars, ECRPQs and product rules.

mod dfa;
mod ecrpq;
mod grammar;
mod neps;
mod sync;

pub use dfa::Dfa;
pub use ecrpq::{Constraint, EcrpqQuery, PathAtom, RelAtom};
pub use grammar::{to_cnf, CnfGrammar, Item};
pub use neps::NepsSpec;
pub use sync::{Letter, SyncAutomaton};
