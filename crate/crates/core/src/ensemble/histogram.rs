use crate::error::{Error, Result};

/// Counts of particle arrivals on a flat detector screen.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternHistogram {
    lo: f64,
    hi: f64,
    bins: usize,
    pub counts: Vec<u64>,
    pub overflow_low: u64,
    pub overflow_high: u64,
    pub total: u64,
}

impl PatternHistogram {
    /// `bins` uniform bins over `[x_min, x_max]`.
    pub fn new(range: (f64, f64), bins: usize) -> Result<Self> {
        let (x_min, x_max) = range;
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::invalid(
                "simulation.bin_range",
                format!("need finite x_min < x_max (got [{x_min}, {x_max}])"),
            ));
        }
        if bins < 2 {
            return Err(Error::invalid(
                "simulation.bins",
                format!("need at least 2 bins (got {bins})"),
            ));
        }
        Ok(Self {
            lo: x_min,
            hi: x_max,
            bins,
            counts: vec![0; bins],
            overflow_low: 0,
            overflow_high: 0,
            total: 0,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// `bins + 1` uniformly spaced edges.
    pub fn bin_edges(&self) -> Vec<f64> {
        let (lo, hi) = self.range();
        let n = self.bins as f64;
        (0..=self.bins)
            .map(|i| lo + (hi - lo) * (i as f64 / n))
            .collect()
    }

    /// Bin for `x`: bins are half-open `[left, right)` except the last,
    /// which also takes `x_max`.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let idx = ((x - lo) / (hi - lo) * self.bins as f64).floor() as usize;
        Some(idx.min(self.bins - 1))
    }

    pub fn record(&mut self, x: f64) {
        self.record_n(x, 1);
    }

    pub fn record_n(&mut self, x: f64, n: u64) {
        match self.bin_of(x) {
            Some(i) => self.counts[i] += n,
            None if x < self.lo => self.overflow_low += n,
            None => self.overflow_high += n,
        }
        self.total += n;
    }

    /// Elementwise sum with a histogram over the same bins.
    pub fn merge(&mut self, other: &PatternHistogram) {
        assert!(
            self.lo == other.lo && self.hi == other.hi && self.bins == other.bins,
            "histograms must share bin edges"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow_low += other.overflow_low;
        self.overflow_high += other.overflow_high;
        self.total += other.total;
    }

    pub fn is_conserved(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.overflow_low + self.overflow_high == self.total
    }
}
