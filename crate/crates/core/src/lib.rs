//! Core ZX-diagram machinery: exact angles, the diagram graph, a tensor
//! contraction semantics oracle, circuit translation, serialization, rewrite
//! rules, random sampling and the reinforcement-learning environment.

pub mod angle;
pub mod circuit;
pub mod diagram;
pub mod env;
pub mod io;
pub mod iso;
pub mod rules;
pub mod sampler;
pub mod seeds;
pub mod semantics;
pub mod verify;

pub use angle::{Angle, AngleClass, Symbol};
pub use diagram::{Diagram, DiagramError, Edge, Node, NodeId, NodeKind, UnfuseSelection};
pub use env::{EnvConfig, Observation, ZxEnv};
pub use rules::{Action, EdgeAction, NodeAction, RewriteOutcome, RuleError};
pub use sampler::SamplerConfig;
