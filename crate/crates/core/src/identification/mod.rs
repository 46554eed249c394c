//! Recovery of the preference primitives from simulated second-period choices.
//!
//! Lotteries live on a finite set of action profiles `Z = {(z1, z2)}`. A choice
//! oracle answers menu queries `c(A2 | A1)` exactly from a representation
//! `(gamma, u, V)` with `V` the convex hull of finitely many utility vectors. The
//! probe operations only consult the oracle's answers when deciding membership;
//! candidate menus for the probes may be built from the representation.

mod affine;
mod cone;
mod game;
mod gamma;
mod probe;
mod space;

pub use affine::{affine_alignment, verify_affine_equivalence, AffineAlignment};
pub use cone::{recover_rationale_cone, ConeConfig, RecoveredCone};
pub use game::{solve_matrix_game, GameSolution};
pub use gamma::{
    estimate_gamma, recover_material_direction, recover_representation, GammaConfig, GammaEstimate, Recovery,
};
pub use probe::{
    inner_cone_membership, matters_for, outer_ground_truth, outer_probe, recover_material_preference, MaterialPreference,
    MattersVerdict, MembershipMode, ProbeConfig,
};
pub use space::{
    ground_truth_inner, ground_truth_outer, id_small_1, oracle_choice, random_regular_representation, regret_value,
    ChoiceOracle, Lottery, OutcomeSpace, RegularRepresentation, Representation,
};
