use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CsvTable;
use crate::error::{Error, Result};
use crate::mechanisms::clear_double_auction;
use crate::netmodel::{generate_instance, ScenarioConfig};
use crate::netopt::{plan_throughput, solve_p1_greedy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub band_count: usize,
    pub trial_seed: u64,
    pub p1_throughput_mbps: f64,
    pub auction_throughput_mbps: f64,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMean {
    pub band_count: usize,
    pub trials: usize,
    pub p1_throughput_mbps: f64,
    pub auction_throughput_mbps: f64,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Ordered by band count, then trial seed.
    pub rows: Vec<SweepRow>,
    /// One entry per band count, ascending.
    pub means: Vec<SweepMean>,
}

impl SweepResult {
    fn from_rows(rows: Vec<SweepRow>) -> Self {
        let mut means: Vec<SweepMean> = Vec::new();
        for row in &rows {
            match means.last_mut() {
                Some(m) if m.band_count == row.band_count => {
                    m.trials += 1;
                    m.p1_throughput_mbps += row.p1_throughput_mbps;
                    m.auction_throughput_mbps += row.auction_throughput_mbps;
                    m.revenue += row.revenue;
                }
                _ => means.push(SweepMean {
                    band_count: row.band_count,
                    trials: 1,
                    p1_throughput_mbps: row.p1_throughput_mbps,
                    auction_throughput_mbps: row.auction_throughput_mbps,
                    revenue: row.revenue,
                }),
            }
        }
        for m in &mut means {
            let n = m.trials as f64;
            m.p1_throughput_mbps /= n;
            m.auction_throughput_mbps /= n;
            m.revenue /= n;
        }
        Self { rows, means }
    }

    /// Table of per-band-count means.
    pub fn means_table(&self) -> MeansTable<'_> {
        MeansTable(&self.means)
    }
}

impl CsvTable for SweepResult {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "band_count",
            "trial_seed",
            "p1_throughput_mbps",
            "auction_throughput_mbps",
            "revenue",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.band_count.to_string(),
                    r.trial_seed.to_string(),
                    r.p1_throughput_mbps.to_string(),
                    r.auction_throughput_mbps.to_string(),
                    r.revenue.to_string(),
                ]
            })
            .collect()
    }
}

pub struct MeansTable<'a>(&'a [SweepMean]);

impl CsvTable for MeansTable<'_> {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "band_count",
            "trials",
            "p1_throughput_mbps",
            "auction_throughput_mbps",
            "revenue",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .map(|m| {
                vec![
                    m.band_count.to_string(),
                    m.trials.to_string(),
                    m.p1_throughput_mbps.to_string(),
                    m.auction_throughput_mbps.to_string(),
                    m.revenue.to_string(),
                ]
            })
            .collect()
    }
}

/// Throughput of the greedy network solve and of the double auction on top
/// of it, per band count and trial.
///
/// Trial `t` uses seed `config.seed + t` for every band count, so instances
/// at different band counts share all random draws and differ only in the
/// band set.
pub fn run_band_sweep(config: &ScenarioConfig, band_counts: &[usize], trials: usize) -> Result<SweepResult> {
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let mut counts = band_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let jobs: Vec<(usize, u64)> = counts
        .iter()
        .flat_map(|&b| (0..trials as u64).map(move |t| (b, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(bands, t)| {
            let seed = config.seed.wrapping_add(t);
            let inst = generate_instance(&config.clone().with_bands(bands).with_seed(seed))?;
            let plan = solve_p1_greedy(&inst);
            let outcome = clear_double_auction(&inst, &plan)?;
            Ok(SweepRow {
                band_count: bands,
                trial_seed: seed,
                p1_throughput_mbps: plan_throughput(&plan, &inst),
                auction_throughput_mbps: outcome.throughput_mbps(&inst),
                revenue: outcome.provider_revenue,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::to_csv_string;

    #[test]
    fn single_trial_single_row() {
        let r = run_band_sweep(&ScenarioConfig::reference(), &[3], 1).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.means.len(), 1);
        assert_eq!(r.rows[0].trial_seed, 1);
    }

    #[test]
    fn no_bands_no_throughput() {
        let r = run_band_sweep(&ScenarioConfig::reference(), &[0], 3).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.p1_throughput_mbps == 0.0 && row.revenue == 0.0));
    }

    #[test]
    fn zero_trials_is_an_error() {
        let err = run_band_sweep(&ScenarioConfig::reference(), &[1], 0).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "trials"));
    }

    #[test]
    fn empty_result_has_header_only() {
        let r = run_band_sweep(&ScenarioConfig::reference(), &[], 2).unwrap();
        assert_eq!(
            to_csv_string(&r).unwrap(),
            "band_count,trial_seed,p1_throughput_mbps,auction_throughput_mbps,revenue\n"
        );
    }

    #[test]
    fn rows_are_ordered_and_dominated() {
        let r = run_band_sweep(&ScenarioConfig::reference(), &[2, 1], 3).unwrap();
        let order: Vec<(usize, u64)> = r.rows.iter().map(|x| (x.band_count, x.trial_seed)).collect();
        assert_eq!(order, vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]);
        for row in &r.rows {
            assert!(row.auction_throughput_mbps <= row.p1_throughput_mbps);
        }
        assert_eq!(r.means.iter().map(|m| m.trials).collect::<Vec<_>>(), vec![3, 3]);
    }
}
