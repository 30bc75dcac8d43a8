//! Multi-phase restricted growth with the n-logistic-sigmoid.
//!
//! * [`model`]: exact evaluation of the model and its input derivatives.
//! * [`calculus`]: analytic hyper-parameter and weight partials, Jacobians.
//! * [`fit`]: inflection detection, bounded least-squares fitting, bootstrap.
//! * [`metrics`]: YIR/XIR growth-state metrics and their interpretation.
//! * [`network`]: multi-output pipelines and their backward pass.
//!
//! ```
//! use nlsig::{NlsigModel, Partition, Sign};
//!
//! let model = NlsigModel::single(Partition::new(6.0, 0.0, 10.0, 5.0, 0.0, 1.0), Sign::Increasing)?;
//! assert_eq!(model.eval(5.0), 0.5);
//! # Ok::<(), nlsig::NlsigError>(())
//! ```

pub mod calculus;
pub mod error;
pub mod fit;
pub mod metrics;
pub mod model;
pub mod network;

pub use calculus::{
    gauss_newton_hessian, param_partials, residual_jacobian, weight_partials, LsqObjective, ParamJacobianRow,
    WeightLayer,
};
pub use error::{NlsigError, Result};
pub use fit::{
    bootstrap, detect_inflections, fit, r_squared, BootstrapOptions, BootstrapResult, FitOptions, FitResult,
    FreeMask, InflectionGuess, TimeSeries,
};
pub use metrics::{
    classify, metric_ci, metric_report, xir, yir, MetricReport, PeakBands, XirState, YirState,
};
pub use model::{ClassicLogistic, NlsigModel, ParamKind, Partition, Sign, PARAMS_PER_PARTITION};
pub use network::{backward, forward, forward_multinomial, NlsigNetwork, Pipeline};
