//! A toy quantum world on a cellular automaton.
//!
//! Every cell of a grid is a behavior of the synchronous-reactive kernel in
//! `rqm-kernel`. A source fires a wavefront (a virtual particle in
//! superposition) which spreads deterministically, two instants per row.
//! When a detector sees it, the detector broadcasts the wavefront's R event:
//! every member cell joins a reduction, one of them is drawn uniformly, and
//! it gives birth to a real particle that then moves by inertia.
//!
//! The world's RNG is consumed by the draw only, so everything before the
//! first detection is independent of the seed.

pub mod measurement;
pub mod particle;
pub mod render;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod world;

pub use measurement::{choose, Birth, DetectionRecord, Detector, MeasurementError, REDUCE_WINDOW};
pub use particle::RealParticle;
pub use render::{ascii, FrameBuffer};
pub use rqm_kernel::KernelError;
pub use scenario::{build_world, parse, to_text, BuildOptions, ScenarioError, ScenarioSpec};
pub use sim::Simulation;
pub use stats::{compare, expected_distribution, frequency_table, run, RunError, RunOptions, RunReport};
pub use world::{BasicState, CellId, CellKind, Rect, World};
