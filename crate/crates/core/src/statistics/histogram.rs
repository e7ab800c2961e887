use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_BINS: usize = 100;

/// Equal-width bins over `[min, max]`; bins are right-open except the last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram<T> {
    pub bin_edges: Vec<T>,
    pub counts: Vec<u64>,
}

impl<T: Real> Histogram<T> {
    /// `sorted` must be ascending.
    pub fn from_sorted(sorted: &[T], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        let (lo, hi) = match (sorted.first(), sorted.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::EmptyDistribution),
        };
        if !(hi > lo) {
            return Err(Error::DegenerateRange);
        }
        let width = (hi - lo) / T::from_count(bins);
        let mut bin_edges: Vec<T> = (0..bins)
            .map(|i| lo + T::from_count(i) * width)
            .collect();
        bin_edges.push(hi);
        let mut counts = vec![0u64; bins];
        for &v in sorted {
            let idx = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self { bin_edges, counts })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Centered moving average of the counts; the window shrinks at the ends.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        let half = window / 2;
        let n = self.counts.len();
        (0..n)
            .map(|i| {
                let a = i.saturating_sub(half);
                let b = (i + half).min(n - 1);
                let s: u64 = self.counts[a..=b].iter().sum();
                s as f64 / (b - a + 1) as f64
            })
            .collect()
    }

    /// Unimodality of the smoothed counts: with `i*` the index of the
    /// largest smoothed count, the smoothed sequence is non-decreasing up to
    /// `i* − slack` and non-increasing from `i* + slack` on.
    pub fn is_smoothed_unimodal(&self, window: usize, slack: usize) -> bool {
        let s = self.smoothed(window);
        let peak = s
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > s[best] { i } else { best });
        let rising_end = peak.saturating_sub(slack);
        let falling_start = (peak + slack).min(s.len() - 1);
        s[..=rising_end].windows(2).all(|w| w[0] <= w[1])
            && s[falling_start..].windows(2).all(|w| w[0] >= w[1])
    }
}
