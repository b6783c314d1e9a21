//! Monte-Carlo study over `(law, r, c)` cells, summaries, artifacts and
//! diagnostics.

mod config;
mod density;
mod diagnostics;
mod experiment;
mod output;
mod summary;
#[cfg(test)]
mod tests;

pub use config::{ExperimentConfig, Preset, PAPER_RATIOS, PAPER_SPIKE_MULTIPLIERS};
pub use density::{emit_density_data, silverman_bandwidth, DensityRow, GridSpec};
pub use diagnostics::{
    concentration_check, concentration_experiment, concentration_t_grid, spiked_consistency_check, ConcentrationReport,
    SpikedConfig, SpikedReport, SpikedRow, TailRow,
};
pub use experiment::{
    cells, null_value, run_experiment, simulate_point_estimates, true_value, with_workers, Cell, CellFailure,
    ExperimentResults, SampleSet, SimulationRecord, TruthRecord,
};
pub use output::{
    artifact_version, fmt_float, read_records_csv, read_samples_csv, read_truth_csv, summary_json, write_density_csv,
    write_records_csv, write_samples_csv, write_summary_csv, write_summary_json, write_truth_csv, DENSITY_HEADER,
    RECORD_HEADER, SAMPLE_HEADER, SUMMARY_HEADER, TRUTH_HEADER,
};
pub use summary::{summarize, SummaryRow, SummaryTable};

impl SampleSet {
    pub fn distribution(&self) -> crate::Result<crate::bootstrap::BootstrapDistribution> {
        crate::bootstrap::BootstrapDistribution::new(
            self.statistic.name(),
            self.point_estimate,
            self.replicates.clone(),
        )
    }
}
