//! Scripted scenario simulator.

pub mod run;
pub mod scenario;
pub mod synth;

pub use run::{box_meets_hull, rittr, run_scenario, FrameRecord, RunError, ScenarioResult, ScenarioRun};
pub use scenario::{build_scenario, ActorTrack, Path, PathPiece, Scenario, ScenarioError, ScenarioKind, ScenarioParams, LANE_WIDTH};
pub use synth::{lagged_heading, synthesize_frame, synthesize_labeled, NoiseConfig};
