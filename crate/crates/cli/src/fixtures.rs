//! Published end-of-life figures packed into run summaries, for checking the report path
//! against known ratios without running the simulator.

use cellwear_core::lifetime::Termination;
use cellwear_core::metrics::{LliBreakdown, RunSummary};

/// (cell, no-V2G days, no-V2G Ah/Ah, moderate-V2G days, moderate-V2G Ah/Ah, expected TvD)
pub const REFERENCE_LIVES: [(&str, f64, f64, f64, f64, f64); 3] = [
    ("NMC111", 371.0, 390.3, 221.0, 453.5, 0.40),
    ("NMC622-25C", 812.0, 854.2, 584.0, 1198.3, 1.43),
    ("NMC622-45C", 380.0, 399.7, 349.0, 716.1, 9.70),
];

pub fn summary(cell: &str, scenario: &str, drive: &str, days: f64, throughput: f64) -> RunSummary {
    let breakdown = LliBreakdown::from_components(0.2, 0.01, 0.0, 0.05, 0.26).expect("components close");
    RunSummary {
        cell: cell.into(),
        scenario: scenario.into(),
        drive: drive.into(),
        mode: "fixture".into(),
        nominal_capacity_ah: 3.5,
        initial_capacity_ah: 3.6,
        termination: Termination::EndOfLife,
        days,
        normalized_throughput: throughput,
        normalized_energy_throughput: 3.6 * throughput,
        capacity_retention: 0.7,
        cp_retention: 0.9,
        cn_retention: 0.85,
        breakdown,
        simulated_days: days.ceil() as u32,
        final_day: days.ceil() as u32,
    }
}

/// Baseline and moderate-V2G summaries for each reference cell on the long drive.
pub fn reference_summaries() -> Vec<RunSummary> {
    REFERENCE_LIVES
        .iter()
        .flat_map(|&(cell, bd, bt, vd, vt, _)| {
            [
                summary(cell, "no_v2g", "long", bd, bt),
                summary(cell, "v2g_moderate", "long", vd, vt),
            ]
        })
        .collect()
}
