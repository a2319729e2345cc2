//! Temporal knowledge graph for versioned hierarchical documents.
//!
//! Norms and their components are modeled as works with dated temporal
//! versions, language versions and reified legislative actions. The crate
//! ingests structured documents and amendment events, persists the graph as
//! a sorted NDJSON snapshot, and answers point-in-time, impact and
//! provenance queries through a deterministic planner that discloses every
//! policy it applied.
//!
//! ```no_run
//! use normgraph::{ingest::ingest_corpus, planner::{Planner, Query}};
//!
//! let (store, _report) = ingest_corpus("fixtures/corpus").unwrap();
//! let clock = "2024-01-01".parse().unwrap();
//! let answer = Planner::new(&store).run(&Query::point_in_time("art6"), clock).unwrap();
//! println!("{}", answer.rendered_text);
//! ```

pub mod eval;
pub mod fixtures;
pub mod ingest;
pub mod locale;
pub mod model;
pub mod planner;
pub mod retrieval;
pub mod store;
pub mod temporal;
pub mod text;
pub mod themes;
pub mod validate;

pub use model::{DateStamp, WorkId};
pub use store::GraphStore;
pub use validate::{validate_graph, Violation};
