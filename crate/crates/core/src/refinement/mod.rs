//! Refinement analyses: flattening, forward simulation, alternate-view
//! abstraction and instantiation links.

pub mod abstraction;
pub mod flatten;
pub mod instantiation;
pub mod simulation;

pub use abstraction::{check_abstraction, gluing_invariants, isomorphic, AbstractionReport, Gate};
pub use flatten::{flatten, Flattened};
pub use instantiation::{check_instantiation, InstantiationReport};
pub use simulation::{
    check_forward_simulation, Counterexample, Obligation, Side, SimulationReport,
};
