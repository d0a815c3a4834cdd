//! Reflective-equilibrium solvers over claim constraint networks.
//!
//! * [`claimnet`]: network and scenario model, JSON file format, DOT export.
//! * [`coherence`]: exact coherence maximization and harmony evaluation.
//! * [`dynamics`]: connectionist harmony dynamics run to a fixed point.
//! * [`activation`]: initial activations from preference data and
//!   likelihood-ratio investigations.
//! * [`medcase`]: the bundled AI medical decision-support fixture and cases.
//! * [`report`]: JSON report shapes shared with the command-line tool.

pub mod activation;
pub mod claimnet;
pub mod coherence;
pub mod dynamics;
pub mod medcase;
pub mod par;
pub mod report;

pub use claimnet::{apply_scenario, ConstraintNetwork, NetworkError, Scenario};
pub use coherence::{solve_exact, vertex_harmony_argmax, ExactBudget, ExactSolution, Partition};
pub use dynamics::{run, EquilibriumResult, SolverConfig};
pub use par::Parallelism;
