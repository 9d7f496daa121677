//! Expected loss of scored binary classifiers under threshold choice methods.
//!
//! Class 0 is the positive class; scores grow with the estimated probability of
//! class 1 and an example is predicted class 0 when its score is `<= t`.

pub mod calibration;
pub mod continuous;
pub mod error;
pub mod format;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod quadrature;
pub mod roc;
pub mod threshold;

pub use calibration::{est, pav, CalibratedModel, Transform};
pub use continuous::{builtin_model, ContinuousModel, IntervalKind, IntervalMap};
pub use error::{Error, Result};
pub use loss::{
    closed_form_loss, cost_curve_points, expected_loss, CurveKind, CurveSeries, LossQuery, LossReport,
    OperatingWeight, WeightFamily,
};
pub use metrics::MetricReport;
pub use model::{ConditionKind, EmpiricalModel, OperatingCondition, Priors, ScoredDataset};
pub use roc::{convex_hull, roc_curve, ConvexHull, Partition, RocCurve};
pub use threshold::{choose_threshold, RateDrivenVariant, RateUniformVariant, ThresholdChoiceMethod, ThresholdSelection};
