//! Blow-up diagnostics for families of solutions as `λ` varies: local maxima
//! and rescaled profiles, mass scaling, decay fits, barriers and the maximum
//! principle.

mod barrier;
mod decay;
mod family;
mod mass;
mod maxima;
mod maxprin;
mod rescale;

pub use barrier::{
    acosh_exp, barrier_edge, build_barrier, Barrier, BarrierNode, BarrierPiece, BarrierReport,
    ComparisonReport, EdgeBarrier, EdgeBarrierCheck, PieceShape,
};
pub use decay::{decay_fit, DecayFitReport};
pub use family::{mass_scaling_curve, BlowupFamily, FamilyMember, MassScalingRow};
pub use mass::{mass_curve, BranchSeed, MassCurve, MassRow, Scenario};
pub use maxima::{find_local_maxima, lower_bound_max, LocalMax};
pub use maxprin::{maximum_principle_check, MaxPrincipleClass};
pub use rescale::{rescale_profile, Chart, RescaledProfile, STAR_CHART_THRESHOLD};
