//! Deterministic discrete-event lab for self-tuning distributed systems.
//!
//! Two managed systems are modelled. The first is a key-based-routing
//! overlay whose maintenance scheduling (stabilize, finger repair,
//! predecessor checks) is tuned per node by a feedback manager built on the
//! [`gamf`] control-loop framework. The second is a distributed store client
//! whose replica-fetch concurrency is tuned by the same kind of manager.
//! Scenario generators (churn, workloads, link speeds) and analytics
//! (windowed expected lookup/get times, distribution summaries,
//! reproducibility scores) round out the toolkit.
//!
//! Everything is seeded and single-threaded: the same configuration and seed
//! reproduce byte-identical results.

pub mod analytics;
pub mod doc_model;
pub mod manager;
pub mod overlay;
pub mod plan;
pub mod ring;
pub mod runner;
pub mod scenario;
pub mod seeds;
