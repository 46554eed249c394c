//! Worked applications built on the two-period model.
//!
//! * Project persistence: effort on a two-stage project with a first-stage cost shock.
//! * Sticky choice: the same decision problem faced twice, before and after the state.
//! * Belief elicitation: repeated belief reports under quadratic scoring with MLRP priors.

mod elicitation;
mod project;
mod sticky;

pub use elicitation::{
    elicitation_report, elicitation_simulate, elicitation_simulate_with, fosd_violation, posterior,
    ElicitationConfig, ElicitationRun, MLRPFamily, Posterior, SecondReport, ELICITATION_HEADER,
};
pub use project::{project_simulate, CostFunction, ProjectInstance, ProjectModel, ProjectOutcome, PROJECT_HEADER};
pub use sticky::{sticky_choice_simulate, StickyInstance, StickyOutcome, STICKY_HEADER};
