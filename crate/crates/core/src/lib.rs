//! Smart-glove flex-sensor toolkit: sensor model, grasp simulator, session
//! ingest, cohort statistics and a nearest-centroid shape/size classifier.

pub mod classify;
pub mod error;
pub mod finger;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod sensor;
pub mod session;
pub mod sim;
pub mod stats;

pub use classify::{Classification, Classifier};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use finger::{Finger, Shape, FINGERS, SHAPES};
pub use pipeline::{analyze, Analysis};
pub use sensor::{CalibrationCurve, SensorConfig};
pub use session::{Diameter, Frame, GraspObject, GraspSession};
pub use sim::{CohortPlan, ProfileTable, Simulator};
