//! Incremental maintenance of graph query answers.
//!
//! Every query class has a state type holding materialized auxiliary
//! relations. A modification (edge insertion or deletion) produces the next
//! state from the previous one and the modified edge, without re-evaluating
//! the query on the whole graph. The [`oracle`] module evaluates the same
//! queries from scratch and is what the test suites compare against.
//!
//! ```
//! use dynq::rpq::RpqState;
//! use dynq::specs::Dfa;
//! use dynq::{Alphabet, Modification, Sym};
//!
//! let al = Alphabet::letters("ab");
//! let mut s = RpqState::new(Dfa::parse("regex a*b", &al)?, 3);
//! s.apply(&Modification::insert(Sym(0), 0, 1))?;
//! s.apply(&Modification::insert(Sym(1), 1, 2))?;
//! assert!(s.query().contains(&(0, 2)));
//! # Ok::<(), dynq::Error>(())
//! ```

pub mod bench;
pub mod bits;
pub mod check;
pub mod cfl;
pub mod dist;
pub mod ecrpq;
pub mod error;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod product;
pub mod rpq;
pub mod session;
pub mod specs;

pub use error::{Error, Result};
pub use graph::{Alphabet, Edge, LabeledGraph, ModKind, Modification, Sym, TcState};
