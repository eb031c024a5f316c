//! Energy-aware multi-robot coverage planning over gridded terrain.
//!
//! The pipeline runs terrain → move costs → coverage model → solver →
//! fleet sizing → simulation; each stage lives in its own module.

pub mod energy;
pub mod planner;
pub mod rp_model;
pub mod simulator;
pub mod solver;
pub mod terrain;

pub use energy::{CommModel, EnergyProfile, MoveCostTable, RobotKind};
pub use planner::{plan_mission, MissionPlan, MissionSpec, SolverMode};
pub use rp_model::{build_rp, RpInstance, RpProblem};
pub use simulator::{simulate, MissionReport, SimConfig, SpeedConfig};
pub use solver::{solve_exact, solve_heuristic, validate, PlanSolution, SolveStatus};
pub use terrain::{Cell, CellGrid, HeightGrid};
