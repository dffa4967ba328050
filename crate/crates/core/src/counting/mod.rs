//! Exact combinatorial oracles.

mod kernels;
mod moments;
mod shells;

pub use kernels::{
    cor_cip_sup, f_c, fc_a_max, fc_increment_check, l4_kernel_row, l4_kernel_sup, parab_kernel_bound,
    paraboloid_ones, ClusterSup, IncrementBand, KernelBound, KernelSup,
};
pub use moments::{
    box_moment_exact, even_moment_count, interval_transform, majorization_check, sumset_ratio_check, power_sums,
    random_majorized_pair, sumset, vinogradov_count, FourierTable, MajorizationCheck, PowerSums, SumsetRatio,
};
pub use shells::{
    arc_max_count, circle_lattice, circle_lattice_with, isqrt, pair_count_ij, sphere_lattice, LatticeShell,
};
