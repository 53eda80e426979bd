use serde::{Deserialize, Serialize};

/// Raw counts from a batch of pairs. Merging is plain addition, so shard
/// results combine the same way regardless of order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub n_pairs: u64,
    pub n_left_pass: u64,
    pub n_right_pass: u64,
    pub n_same: u64,
    pub n_diff: u64,
}

impl Tally {
    /// Records one pair. `coincidence` is `Some(same)` when both sides passed.
    #[inline]
    pub fn record(&mut self, left_pass: bool, right_pass: bool, coincidence: Option<bool>) {
        self.n_pairs += 1;
        self.n_left_pass += left_pass as u64;
        self.n_right_pass += right_pass as u64;
        match coincidence {
            Some(true) => self.n_same += 1,
            Some(false) => self.n_diff += 1,
            None => {}
        }
    }

    pub fn n_coincident(&self) -> u64 {
        self.n_same + self.n_diff
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            n_pairs: self.n_pairs + other.n_pairs,
            n_left_pass: self.n_left_pass + other.n_left_pass,
            n_right_pass: self.n_right_pass + other.n_right_pass,
            n_same: self.n_same + other.n_same,
            n_diff: self.n_diff + other.n_diff,
        }
    }

    pub fn estimate(&self) -> CorrelationEstimate {
        CorrelationEstimate::from_counts(self.n_pairs, self.n_same, self.n_diff)
    }
}

/// Correlation statistics over the counted (double-pass) pairs.
///
/// `e`, `rate` and `stderr` are `None` when nothing was counted; that is a
/// legitimate outcome for extreme openings, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub n_pairs: u64,
    pub n_coincident: u64,
    pub n_same: u64,
    pub n_diff: u64,
    pub e: Option<f64>,
    pub rate: Option<f64>,
    pub stderr: Option<f64>,
}

impl CorrelationEstimate {
    pub fn from_counts(n_pairs: u64, n_same: u64, n_diff: u64) -> Self {
        let n_coincident = n_same + n_diff;
        assert!(n_coincident <= n_pairs, "more coincidences than pairs");
        let (e, rate, stderr) = if n_coincident == 0 {
            (None, None, None)
        } else {
            let n = n_coincident as f64;
            let e = (n_same as f64 - n_diff as f64) / n;
            let var = (1.0 - e * e).max(0.0);
            (Some(e), Some((1.0 + e) / 2.0), Some((var / n).sqrt()))
        };
        Self {
            n_pairs,
            n_coincident,
            n_same,
            n_diff,
            e,
            rate,
            stderr,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.n_coincident > 0
    }

    /// Fraction of pairs that were counted at all.
    pub fn coincidence_fraction(&self) -> f64 {
        if self.n_pairs == 0 {
            0.0
        } else {
            self.n_coincident as f64 / self.n_pairs as f64
        }
    }
}

/// Single-side pass fractions before coincidence filtering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidePassRate {
    pub n_pairs: u64,
    pub n_left: u64,
    pub n_right: u64,
}

impl SidePassRate {
    pub fn left(&self) -> f64 {
        self.n_left as f64 / self.n_pairs as f64
    }

    pub fn right(&self) -> f64 {
        self.n_right as f64 / self.n_pairs as f64
    }

    /// Binomial standard error of a pass fraction `p` over this many pairs.
    pub fn stderr(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_pairs as f64).sqrt()
    }
}

impl From<Tally> for SidePassRate {
    fn from(t: Tally) -> Self {
        Self {
            n_pairs: t.n_pairs,
            n_left: t.n_left_pass,
            n_right: t.n_right_pass,
        }
    }
}
