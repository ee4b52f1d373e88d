use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CsvTable;
use crate::error::{Error, Result};
use crate::mechanisms::double_auction;
use crate::netmodel::{NetworkInstance, NodeId, RequestKey};

/// Evenly spaced bid values `lo + (hi - lo) * i / (points - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 4.0,
            points: 41,
        }
    }
}

impl GridSpec {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::config("points", "grid needs at least 2 points"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::config(
                "hi",
                format!("grid range [{}, {}] is empty", self.lo, self.hi),
            ));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    /// Index of the grid point nearest to `v` (clamped to the range).
    pub fn snap(&self, v: f64) -> usize {
        let t = (v - self.lo) / (self.hi - self.lo) * (self.points - 1) as f64;
        t.round().clamp(0.0, (self.points - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub bid1: f64,
    pub bid2: f64,
    pub utility: f64,
}

/// Utility of one buyer over a grid of bids for its two requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffSurface {
    pub buyer_id: NodeId,
    pub requests: [RequestKey; 2],
    pub grid: GridSpec,
    /// True values snapped onto the grid; they are also the truthful bids.
    pub true_values: [f64; 2],
    /// Grid indices of the truthful cell.
    pub truthful_index: [usize; 2],
    /// Row-major: `cells[i * points + j]` has `bid1 = grid[i]`, `bid2 = grid[j]`.
    pub cells: Vec<SurfaceCell>,
}

impl PayoffSurface {
    pub fn cell(&self, i: usize, j: usize) -> &SurfaceCell {
        &self.cells[i * self.grid.points + j]
    }

    pub fn truthful_utility(&self) -> f64 {
        self.cell(self.truthful_index[0], self.truthful_index[1]).utility
    }

    pub fn max_utility(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.utility)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cell with the highest utility; the first one in row-major order on ties.
    pub fn argmax(&self) -> &SurfaceCell {
        let best = self.max_utility();
        self.cells
            .iter()
            .find(|c| c.utility == best)
            .expect("surface is nonempty")
    }
}

impl CsvTable for PayoffSurface {
    fn header(&self) -> Vec<&'static str> {
        vec!["bid1", "bid2", "utility"]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| vec![c.bid1.to_string(), c.bid2.to_string(), c.utility.to_string()])
            .collect()
    }
}

/// Reruns the double auction over a grid of bids for `buyer_id`'s two
/// requests, all other reports fixed.
///
/// The buyer's true values are snapped onto the grid first, so the truthful
/// report is exactly one of the cells. Utility is the sum over won requests
/// of true value minus charge.
pub fn payoff_surface(instance: &NetworkInstance, buyer_id: NodeId, grid: GridSpec) -> Result<PayoffSurface> {
    grid.validate()?;
    let mut keys: Vec<RequestKey> = instance
        .requests
        .iter()
        .filter(|r| r.buyer_id == buyer_id)
        .map(|r| r.key())
        .collect();
    keys.sort();
    if keys.len() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "buyer {buyer_id} has {} requests; the payoff surface needs exactly 2",
            keys.len()
        )));
    }
    let requests = [keys[0], keys[1]];

    let mut base = instance.clone();
    let mut truthful_index = [0; 2];
    let mut true_values = [0.0; 2];
    for (slot, key) in requests.iter().enumerate() {
        let req = base.request_mut(*key).expect("key taken from the instance");
        let idx = grid.snap(req.true_value);
        truthful_index[slot] = idx;
        true_values[slot] = grid.value(idx);
        req.true_value = true_values[slot];
        req.bid = true_values[slot];
    }

    let values = grid.values();
    let cells = (0..grid.points * grid.points)
        .into_par_iter()
        .map(|c| {
            let bids = [values[c / grid.points], values[c % grid.points]];
            let mut inst = base.clone();
            for (key, bid) in requests.iter().zip(bids) {
                inst.request_mut(*key).expect("key taken from the instance").bid = bid;
            }
            let outcome = double_auction(&inst)?;
            let utility = requests
                .iter()
                .zip(true_values)
                .filter_map(|(key, v)| outcome.trade_for(*key).map(|t| v - t.buyer_charge))
                .fold(0.0, |acc, u| acc + u);
            Ok(SurfaceCell {
                bid1: bids[0],
                bid2: bids[1],
                utility,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PayoffSurface {
        buyer_id,
        requests,
        grid,
        true_values,
        truthful_index,
        cells,
    })
}
