//! Poisson solution of the Burgers drift, generator and energy evaluation,
//! the sums bounding the energies, time-integrated drifts, and the discrete
//! forward/backward martingale decomposition.

mod accumulate;
mod energy;
mod martingale;
mod observable;
mod poisson;

pub use accumulate::{
    accumulate_drift, accumulate_mild_drift, drift_coordinates, mollified_coordinates,
    mollified_drift, AccumulatorKind, DriftAccumulator,
};
pub use energy::{
    ddt_coefficient, dirichlet_energy, expected_dirichlet_energy, i_sum, i_sum_2d, i_sum_ddt,
    i_sum_diff, i_sum_with,
};
pub use martingale::{martingale_decompose, observe, MartingalePair};
pub use observable::{Observable, Part};
pub use poisson::{generator_apply, h_poisson};
