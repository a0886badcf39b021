//! Energy-delay figures of merit.

use serde::Serialize;

use super::SimulationReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub energy: f64,
    pub delay: f64,
    /// `energy * delay`
    pub edp: f64,
    /// `energy * delay^2`
    pub ed2p: f64,
}

impl Metrics {
    pub fn new(energy: f64, delay: f64) -> Self {
        Self {
            energy,
            delay,
            edp: energy * delay,
            ed2p: energy * delay * delay,
        }
    }
}

pub fn compute_metrics(report: &SimulationReport) -> Metrics {
    Metrics::new(report.total_energy, report.makespan)
}
