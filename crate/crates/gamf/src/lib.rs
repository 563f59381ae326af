//! A small framework for building autonomic control loops.
//!
//! The framework owns a time-stamped *shared knowledge* store of [`Event`]s and
//! [`MetricValue`]s, a *system adapters registry*, and a trigger engine.
//! Management components are plugged in as system adapters of four kinds:
//! event generators and effectors touch the managed system, metric extractors
//! and policy evaluators close the loop over the knowledge store.
//!
//! The framework itself never reads a wall clock. Time is simulated integer
//! milliseconds supplied by the caller, which makes every run replayable:
//! the same sequence of [`Gamf::record_event`] and [`Gamf::advance`] calls
//! produces the same firing sequence.

mod engine;
mod error;
mod knowledge;
mod registry;
mod trigger;

pub use engine::{Firing, Gamf, SharedGamf};
pub use error::GamfError;
pub use knowledge::{Event, KnowledgeFilter, MetricValue, Payload, Record};
pub use registry::{AdapterDescriptor, AdapterKind};
pub use trigger::{CustomTrigger, TriggerSpec};
