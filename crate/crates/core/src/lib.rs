//! Heterogeneous multi-robot inspection planning on semantic grid maps.
//!
//! The pipeline turns a labeled grid into inspection tasks, connects them with a
//! roadmap, prices every path per robot (travel time plus accident risk) and
//! assigns tasks to robots by solving a min-max heterogeneous vehicle routing
//! problem.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the file formats and the
//! command line tool use.

pub mod costmodel;
pub mod error;
pub mod geometry;
pub mod gridmap;
pub mod hvrp;
pub mod num;
pub mod roadmap;
pub mod scenario;
pub mod taskextract;

pub use error::{Error, Result};
pub use num::Real;

pub type Point = geometry::Point<f64>;
pub type SemanticGrid = gridmap::SemanticGrid<f64>;
pub type ClassConfig = gridmap::ClassConfig<f64>;
pub type VoxelStack = gridmap::VoxelStack<f64>;
pub type RobotProfile = costmodel::RobotProfile<f64>;
pub type CostMatrix = costmodel::CostMatrix<f64>;
pub type EdgeCost = costmodel::EdgeCost<f64>;
pub type ClusterParams = taskextract::ClusterParams<f64>;
pub type InspectionTask = taskextract::InspectionTask<f64>;
pub type Roadmap = roadmap::Roadmap<f64>;
pub type PathTable = roadmap::PathTable<f64>;
pub type RrtParams = roadmap::RrtParams<f64>;
pub type RoutingProblem = hvrp::RoutingProblem<f64>;
pub type Metrics = hvrp::Metrics<f64>;
pub type Objective = hvrp::Objective<f64>;
pub type SolveOutcome = hvrp::SolveOutcome<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type LoadedScenario = scenario::LoadedScenario<f64>;
pub type MapSpec = scenario::MapSpec<f64>;
pub type SolutionFile = scenario::SolutionFile<f64>;
