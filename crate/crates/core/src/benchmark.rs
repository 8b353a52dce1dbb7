//! Timing of circuit reduction on chains of cascaded MZIs.

use std::time::Instant;

use crate::cascade::reduce_circuit;
use crate::error::{Error, Result};
use crate::reference::{mzi_chain, MziOptions};
use crate::smatrix::FrequencyGrid;

/// Waveguide joining consecutive MZIs in a benchmark chain.
pub const LINK_LENGTH: f64 = 10e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub mzis: usize,
    pub mean_seconds: f64,
    /// `mean_seconds` over the mean of the smallest count.
    pub ratio: f64,
}

/// Mean wall time of `reduce_circuit` over `repeats` runs for each chain
/// length. Circuit construction is not timed; model evaluation is.
pub fn benchmark_chains(counts: &[usize], repeats: usize, grid: &FrequencyGrid) -> Result<Vec<BenchRow>> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(Error::Sweep("MZI counts must be at least 1".into()));
    }
    if repeats == 0 {
        return Err(Error::Sweep("repeats must be at least 1".into()));
    }
    let opts = MziOptions::default();
    let mut means = Vec::with_capacity(counts.len());
    for &count in counts {
        let chain = mzi_chain(count, &opts, LINK_LENGTH)?;
        reduce_circuit(&chain, grid)?;
        let start = Instant::now();
        for _ in 0..repeats {
            std::hint::black_box(reduce_circuit(&chain, grid)?);
        }
        means.push(start.elapsed().as_secs_f64() / repeats as f64);
    }
    let smallest = counts.iter().enumerate().min_by_key(|(_, &c)| c).map(|(i, _)| means[i]).unwrap();
    Ok(counts
        .iter()
        .zip(means)
        .map(|(&mzis, mean_seconds)| BenchRow { mzis, mean_seconds, ratio: mean_seconds / smallest })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_follow_counts() {
        let grid = FrequencyGrid::linspace(1.9e14, 2.0e14, 8).unwrap();
        let rows = benchmark_chains(&[2, 1], 2, &grid).unwrap();
        assert_eq!(rows.iter().map(|r| r.mzis).collect::<Vec<_>>(), [2, 1]);
        assert_eq!(rows[1].ratio, 1.0);
        assert!(benchmark_chains(&[0], 1, &grid).is_err());
        assert!(benchmark_chains(&[1], 0, &grid).is_err());
    }
}
