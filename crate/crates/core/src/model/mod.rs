//! Shared vocabulary: units, atomic parameters, pulse envelopes, Zeeman
//! shifts and the scenario description of one run.

mod pulse;
mod scenario;
mod units;
mod zeeman;

pub use pulse::{ControlField, PulseKind, PulseShape};
pub use scenario::{
    AtomicSystem, DenseWindow, GridSpec, Level, MagneticStage, OutputSpec, Scenario,
    StorageTimeline, CONTROL_OFF_THRESHOLD, DARK_FIELD_LIMIT,
};
pub use units::{Unit, UnitContext, AU_MAGNETIC_TESLA, AU_TIME_SECONDS, SPEED_OF_LIGHT_CM_S};
pub use zeeman::{magnetic_phase_area, zeeman_shift, LevelZeeman, PhaseArea};
