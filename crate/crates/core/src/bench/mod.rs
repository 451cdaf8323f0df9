//! Synthetic workload generation, independent verification oracles and
//! the benchmark suite.

mod generator;
mod oracle;
mod suite;

pub use generator::{
    generate, ill_conditioned_spd, preset, preset_names, spd_csr, BoundPattern,
    GeneratorSpec, HessianKind,
};
pub use oracle::{
    active_set_oracle, assemble_aug_matrix, assemble_newton_system, assemble_reduced_matrix,
    dense_csr, dense_from_operator, dense_newton_oracle, newton_backsub_residual,
    reduced_rhs_vectors, sample_iterates, InstrumentedIteration, OracleSolution,
};
pub use suite::{render_table, run_growth, run_smoke, trend_ok, GrowthReport, ReportRow};
