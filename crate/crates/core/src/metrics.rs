//! Lithium-loss attribution, normalized throughput, the throughput-gained-versus-days-lost ratio
//! and its trend against the calendar share of degradation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{FARADAY, SECONDS_PER_HOUR};
use crate::error::MetricsError;
use crate::lifetime::{DayLog, LifetimeResult, Termination};

/// Closure tolerance between the mechanism ledger and the measured lithium loss.
pub const CLOSURE_TOLERANCE: f64 = 1e-4;

/// Fraction of lithium lost since beginning of life.
pub fn lli_total(n_li_bol: f64, n_li: f64) -> Result<f64, MetricsError> {
    let lli = (n_li_bol - n_li) / n_li_bol;
    if lli < -1e-9 {
        return Err(MetricsError::NegativeLoss(lli));
    }
    Ok(lli.max(0.0))
}

/// Lithium (mol) isolated when the electrodes lose `d_cn_ah` and `d_cp_ah` (both ≤ 0) of capacity
/// at stoichiometries `x` and `y`.
pub fn lli_lam_increment(x: f64, y: f64, d_cn_ah: f64, d_cp_ah: f64) -> f64 {
    -SECONDS_PER_HOUR / FARADAY * (x * d_cn_ah + y * d_cp_ah)
}

pub fn normalized_throughput(ah: f64, nominal_capacity_ah: f64) -> f64 {
    ah / nominal_capacity_ah
}

/// Lithium losses as fractions of the beginning-of-life inventory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LliBreakdown {
    pub lli_total: f64,
    pub lli_sei: f64,
    pub lli_plating: f64,
    pub lli_diss: f64,
    pub lli_crack: f64,
    pub lli_cal: f64,
    pub lli_lam: f64,
    pub cal_fraction: f64,
}

impl LliBreakdown {
    /// Assemble from per-mechanism fractions and the independently measured total.
    pub fn from_components(sei: f64, plating: f64, diss: f64, crack: f64, total: f64) -> Result<Self, MetricsError> {
        let ledger = sei + plating + diss + crack;
        if (ledger - total).abs() > CLOSURE_TOLERANCE * total.abs().max(1.0) {
            return Err(MetricsError::LedgerMismatch { ledger, lli: total });
        }
        let cal = sei + diss;
        Ok(Self {
            lli_total: total,
            lli_sei: sei,
            lli_plating: plating,
            lli_diss: diss,
            lli_crack: crack,
            lli_cal: cal,
            lli_lam: diss + crack,
            cal_fraction: if total > 0.0 {
                (cal / total).clamp(0.0, 1.0)
            } else {
                0.0
            },
        })
    }

    pub fn at(log: &DayLog, n_li_bol: f64) -> Result<Self, MetricsError> {
        let f = |v: f64| v / n_li_bol;
        let l = &log.lli;
        Self::from_components(
            f(l.sei),
            f(l.plating),
            f(l.dissolution),
            f(l.crack),
            lli_total(n_li_bol, log.lithium)?,
        )
    }
}

/// Breakdown at the end-of-life crossing.
pub fn breakdown(result: &LifetimeResult) -> Result<LliBreakdown, MetricsError> {
    let eol = result.eol.ok_or(MetricsError::NoEol)?;
    LliBreakdown::at(&eol.state, result.initial_lithium)
}

/// End-of-life summary of one lifetime run, shaped like the mechanism comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub cell: String,
    pub scenario: String,
    pub drive: String,
    pub mode: String,
    pub nominal_capacity_ah: f64,
    pub initial_capacity_ah: f64,
    pub termination: Termination,
    /// Fractional day of the end-of-life crossing, or the last day reached when censored.
    pub days: f64,
    pub normalized_throughput: f64,
    /// Energy throughput divided by nominal capacity, Wh/Ah.
    pub normalized_energy_throughput: f64,
    pub capacity_retention: f64,
    pub cp_retention: f64,
    pub cn_retention: f64,
    pub breakdown: LliBreakdown,
    pub simulated_days: u32,
    pub final_day: u32,
}

impl RunSummary {
    pub fn from_result(result: &LifetimeResult, drive: &str, mode: &str) -> Result<Self, MetricsError> {
        let (days, log) = match result.eol {
            Some(e) => (e.day, e.state),
            None => {
                let last = *result
                    .logs
                    .last()
                    .ok_or(MetricsError::TooFewPoints { needed: 1, got: 0 })?;
                (last.day as f64, last)
            }
        };
        let c_nom = result.nominal_capacity_ah;
        let init = &result.initial.esoh;
        Ok(Self {
            cell: result.cell.clone(),
            scenario: result.label.clone(),
            drive: drive.to_string(),
            mode: mode.to_string(),
            nominal_capacity_ah: c_nom,
            initial_capacity_ah: init.capacity_ah,
            termination: result.termination,
            days,
            normalized_throughput: normalized_throughput(log.throughput_ah, c_nom),
            normalized_energy_throughput: log.throughput_wh / c_nom,
            capacity_retention: log.esoh.capacity_ah / init.capacity_ah,
            cp_retention: log.esoh.positive_ah / init.positive_ah,
            cn_retention: log.esoh.negative_ah / init.negative_ah,
            breakdown: LliBreakdown::at(&log, result.initial_lithium)?,
            simulated_days: result.simulated_days,
            final_day: result.final_day(),
        })
    }

    pub fn reached_eol(&self) -> bool {
        self.termination == Termination::EndOfLife
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tvd {
    /// V2G delivered less throughput than the baseline.
    Zero,
    Finite(f64),
    /// V2G did not shorten the life in days.
    Infinite,
}

impl Tvd {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Tvd::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Tvd::Zero => "zero",
            Tvd::Finite(_) => "finite",
            Tvd::Infinite => "infinite",
        }
    }

    /// Numeric value with the special cases mapped to 0 and infinity.
    pub fn value(&self) -> f64 {
        match *self {
            Tvd::Zero => 0.0,
            Tvd::Finite(v) => v,
            Tvd::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Tvd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tvd::Zero => write!(f, "0"),
            Tvd::Finite(v) => write!(f, "{v:.3}"),
            Tvd::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvdResult {
    /// Extra normalized throughput relative to the baseline.
    pub gain: f64,
    /// Lost life in days relative to the baseline.
    pub loss: f64,
    pub tvd: Tvd,
}

impl TvdResult {
    pub fn new(gain: f64, loss: f64) -> Self {
        let tvd = if gain < 0.0 {
            Tvd::Zero
        } else if loss <= 0.0 {
            Tvd::Infinite
        } else {
            Tvd::Finite(gain / loss)
        };
        Self { gain, loss, tvd }
    }

    pub fn from_life(base_days: f64, base_throughput: f64, v2g_days: f64, v2g_throughput: f64) -> Self {
        Self::new(
            (v2g_throughput - base_throughput) / base_throughput,
            (base_days - v2g_days) / base_days,
        )
    }
}

fn check_pair(base: &RunSummary, v2g: &RunSummary) -> Result<(), MetricsError> {
    if base.cell != v2g.cell || base.drive != v2g.drive {
        return Err(MetricsError::Mismatch(format!(
            "{} / {} against {} / {}",
            base.cell, base.drive, v2g.cell, v2g.drive
        )));
    }
    for s in [base, v2g] {
        if !s.reached_eol() {
            return Err(MetricsError::Mismatch(format!(
                "{} {} {} did not reach end of life",
                s.cell, s.scenario, s.drive
            )));
        }
    }
    Ok(())
}

/// Throughput gained versus days lost of a V2G run against its no-V2G baseline.
pub fn tvd(base: &RunSummary, v2g: &RunSummary) -> Result<TvdResult, MetricsError> {
    check_pair(base, v2g)?;
    Ok(TvdResult::from_life(
        base.days,
        base.normalized_throughput,
        v2g.days,
        v2g.normalized_throughput,
    ))
}

/// Same ratio measured on energy instead of charge throughput.
pub fn tvd_energy(base: &RunSummary, v2g: &RunSummary) -> Result<TvdResult, MetricsError> {
    check_pair(base, v2g)?;
    Ok(TvdResult::from_life(
        base.days,
        base.normalized_energy_throughput,
        v2g.days,
        v2g.normalized_energy_throughput,
    ))
}

/// One V2G run compared against the baseline of the same cell and drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvdEntry {
    pub cell: String,
    pub drive: String,
    pub scenario: String,
    pub charge: TvdResult,
    pub energy: TvdResult,
    /// Calendar share of the V2G run's lithium loss.
    pub cal_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvdReport {
    pub entries: Vec<TvdEntry>,
    /// V2G runs left out, with the reason.
    pub unmatched: Vec<(String, String)>,
}

impl TvdReport {
    pub fn trend_points(&self) -> Vec<TrendPoint> {
        self.entries
            .iter()
            .map(|e| TrendPoint {
                cell: e.cell.clone(),
                scenario: e.scenario.clone(),
                drive: e.drive.clone(),
                cal_fraction: e.cal_fraction,
                tvd: e.charge.tvd,
            })
            .collect()
    }
}

/// Pair every V2G summary with the no-V2G summary of the same cell and drive.
pub fn compare_runs(summaries: &[RunSummary], baseline_scenario: &str) -> Result<TvdReport, MetricsError> {
    let v2g: Vec<&RunSummary> = summaries.iter().filter(|s| s.scenario != baseline_scenario).collect();
    if v2g.is_empty() {
        return Err(MetricsError::NoV2gRuns);
    }
    let mut entries = Vec::new();
    let mut unmatched = Vec::new();
    for run in v2g {
        let key = format!("{}/{}/{}", run.cell, run.drive, run.scenario);
        let base = summaries
            .iter()
            .find(|s| s.scenario == baseline_scenario && s.cell == run.cell && s.drive == run.drive);
        let Some(base) = base else {
            unmatched.push((key.clone(), MetricsError::MissingBaseline(key).to_string()));
            continue;
        };
        match (tvd(base, run), tvd_energy(base, run)) {
            (Ok(charge), Ok(energy)) => entries.push(TvdEntry {
                cell: run.cell.clone(),
                drive: run.drive.clone(),
                scenario: run.scenario.clone(),
                charge,
                energy,
                cal_fraction: run.breakdown.cal_fraction,
            }),
            (Err(e), _) | (_, Err(e)) => unmatched.push((key, e.to_string())),
        }
    }
    if entries.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    Ok(TvdReport { entries, unmatched })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub cell: String,
    pub scenario: String,
    pub drive: String,
    pub cal_fraction: f64,
    pub tvd: Tvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    /// Points with a finite positive ratio, used for the fit.
    pub points: Vec<TrendPoint>,
    /// Zero or infinite ratios, left out of the fit.
    pub excluded: Vec<TrendPoint>,
    /// Least-squares line of log10 TvD on cal_fraction; absent when the abscissae coincide.
    pub fit: Option<LineFit>,
    pub spearman: Option<f64>,
    /// True when log10 TvD never decreases as cal_fraction increases.
    pub monotone: bool,
}

/// Ranks starting at 1 with ties given their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation; `None` when either variable is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Ordinary least squares `y = slope * x + intercept`; `None` when all x coincide.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

pub fn trend_report(all: Vec<TrendPoint>) -> Result<TrendReport, MetricsError> {
    let (points, excluded): (Vec<_>, Vec<_>) = all.into_iter().partition(|p| p.tvd.finite().is_some_and(|v| v > 0.0));
    if points.len() < 2 {
        log::warn!("trend has fewer than two finite TvD points");
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.cal_fraction).collect();
    let y: Vec<f64> = points.iter().map(|p| p.tvd.value().log10()).collect();
    let fit = least_squares(&x, &y);
    if fit.is_none() {
        log::warn!("all trend points share one cal_fraction; slope undefined");
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let monotone = order.windows(2).all(|w| y[w[1]] >= y[w[0]]);
    Ok(TrendReport {
        spearman: spearman(&x, &y),
        points,
        excluded,
        fit,
        monotone,
    })
}
