//! Observables and Monte-Carlo estimators built on the scheme drivers.

mod moments;
mod observable;
pub mod properties;
mod rate;
pub(crate) mod weak;

pub use moments::{interface_profile, moment_sup_estimate, MomentReport, ProfileSnapshot};
pub use observable::StepTestFunction;
pub use properties::{property_suite, CheckResult, PropertyReport, TamingVariant};
pub use rate::{fit_convergence_rate, RateFit, RateFitError};
pub use weak::{
    weak_error_estimate, weak_error_sweep, Coupling, ErrorRow, ErrorTable, TableMeta, WeakError,
};
