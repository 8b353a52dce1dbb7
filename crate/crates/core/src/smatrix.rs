//! Frequency-dependent scattering data.
//!
//! An [`SMatrix`] stores `N_f` complex `N×N` slices in one contiguous,
//! row-major buffer. Element `[f][i][j]` is the amplitude leaving port `i`
//! for a unit wave entering port `j` at frequency `f`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength_to_frequency(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

pub fn frequency_to_wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

/// Strictly increasing, positive frequency points in Hz.
#[derive(Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Arc<[f64]>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidGrid(format!("non-positive or non-finite point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points: points.into() })
    }

    /// `n` points uniformly spaced over `[start, stop]`, both ends included.
    pub fn linspace(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::InvalidGrid("grid needs at least one point".into())),
            1 => Self::new(vec![start_hz]),
            _ => {
                let step = (stop_hz - start_hz) / (n - 1) as f64;
                let mut pts: Vec<f64> = (0..n).map(|i| start_hz + step * i as f64).collect();
                pts[n - 1] = stop_hz;
                Self::new(pts)
            }
        }
    }

    pub fn single(freq_hz: f64) -> Result<Self> {
        Self::new(vec![freq_hz])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; a grid holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        self.points.iter().map(|&f| frequency_to_wavelength(f)).collect()
    }

    /// Contiguous sub-grid `points[start..end]`.
    pub fn subgrid(&self, start: usize, end: usize) -> Self {
        assert!(start < end && end <= self.len(), "subgrid range out of bounds");
        Self { points: self.points[start..end].into() }
    }
}

impl fmt::Debug for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrequencyGrid({} pts, {:e}..{:e} Hz)", self.len(), self.min(), self.max())
    }
}

/// Name of a port (pin). Non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortLabel(String);

impl PortLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::InvalidLabel(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for PortLabel {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn labels<S: AsRef<str>>(names: &[S]) -> Result<Vec<PortLabel>> {
    names.iter().map(|n| PortLabel::new(n.as_ref())).collect()
}

fn check_unique(ports: &[PortLabel]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ports.len());
    for p in ports {
        if !seen.insert(p.as_str()) {
            return Err(Error::InvalidLabel(format!("{p} (duplicate)")));
        }
    }
    Ok(())
}

/// Scattering matrix sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    grid: FrequencyGrid,
    ports: Vec<PortLabel>,
    data: Vec<Complex64>,
}

impl SMatrix {
    pub fn new(grid: FrequencyGrid, ports: Vec<PortLabel>, data: Vec<Complex64>) -> Result<Self> {
        check_unique(&ports)?;
        let n = ports.len();
        let expected = grid.len() * n * n;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{} frequencies x {n} ports needs {expected} entries, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, ports, data })
    }

    pub fn zeros(grid: FrequencyGrid, ports: Vec<PortLabel>) -> Result<Self> {
        let len = grid.len() * ports.len() * ports.len();
        Self::new(grid, ports, vec![Complex64::new(0.0, 0.0); len])
    }

    /// Builds a matrix whose slice at each frequency is produced by `slice_fn`,
    /// which fills a zeroed row-major `N×N` buffer.
    pub fn from_slices<F>(grid: FrequencyGrid, ports: Vec<PortLabel>, mut slice_fn: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [Complex64]),
    {
        let mut s = Self::zeros(grid, ports)?;
        let nn = s.n_ports() * s.n_ports();
        if nn > 0 {
            for (f, chunk) in s.grid.points.iter().zip(s.data.chunks_exact_mut(nn)) {
                slice_fn(*f, chunk);
            }
        }
        Ok(s)
    }

    /// Frequency-flat matrix repeating one row-major `N×N` slice.
    pub fn constant(grid: FrequencyGrid, ports: Vec<PortLabel>, slice: &[Complex64]) -> Result<Self> {
        let n = ports.len();
        if slice.len() != n * n {
            return Err(Error::Shape(format!("{n}-port slice needs {} entries", n * n)));
        }
        Self::from_slices(grid, ports, |_, out| out.copy_from_slice(slice))
    }

    pub(crate) fn from_parts_unchecked(grid: FrequencyGrid, ports: Vec<PortLabel>, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), grid.len() * ports.len() * ports.len());
        Self { grid, ports, data }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn ports(&self) -> &[PortLabel] {
        &self.ports
    }

    pub fn n_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn n_freq(&self) -> usize {
        self.grid.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn port_index(&self, name: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.as_str() == name)
    }

    #[inline]
    pub fn get(&self, f: usize, i: usize, j: usize) -> Complex64 {
        let n = self.n_ports();
        self.data[(f * n + i) * n + j]
    }

    /// Row-major `N×N` slice at frequency index `f`.
    pub fn slice(&self, f: usize) -> &[Complex64] {
        let nn = self.n_ports() * self.n_ports();
        &self.data[f * nn..(f + 1) * nn]
    }

    /// Entry `(i, j)` over all frequencies.
    pub fn element(&self, i: usize, j: usize) -> Vec<Complex64> {
        (0..self.n_freq()).map(|f| self.get(f, i, j)).collect()
    }

    pub fn with_ports(self, ports: Vec<PortLabel>) -> Result<Self> {
        if ports.len() != self.ports.len() {
            return Err(Error::ArityMismatch { expected: self.ports.len(), got: ports.len() });
        }
        check_unique(&ports)?;
        Ok(Self { ports, ..self })
    }

    /// Reorders ports so that new port `p` is old port `order[p]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_ports();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: order.len() });
        }
        for &o in order {
            if o >= n || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{n}")));
            }
        }
        let ports = order.iter().map(|&o| self.ports[o].clone()).collect();
        let mut data = Vec::with_capacity(self.data.len());
        for f in 0..self.n_freq() {
            let s = self.slice(f);
            for &oi in order {
                data.extend(order.iter().map(|&oj| s[oi * n + oj]));
            }
        }
        Ok(Self::from_parts_unchecked(self.grid.clone(), ports, data))
    }

    /// Linear interpolation of real and imaginary parts onto `target`.
    ///
    /// Target points must lie inside the source span; there is no
    /// extrapolation. Points that coincide with source points are copied
    /// exactly.
    pub fn interpolate(&self, target: &FrequencyGrid) -> Result<Self> {
        if target == &self.grid {
            return Ok(self.clone());
        }
        let src = self.grid.points();
        let (lo, hi) = (self.grid.min(), self.grid.max());
        if let Some(&bad) = target.points().iter().find(|&&f| f < lo || f > hi) {
            return Err(Error::Range { freq_hz: bad, min_hz: lo, max_hz: hi });
        }
        let nn = self.n_ports() * self.n_ports();
        let mut data = Vec::with_capacity(target.len() * nn);
        for &f in target.points() {
            // first source index with src[idx] >= f
            let idx = src.partition_point(|&x| x < f);
            if src[idx] == f {
                data.extend_from_slice(self.slice(idx));
                continue;
            }
            let (f0, f1) = (src[idx - 1], src[idx]);
            let w = (f - f0) / (f1 - f0);
            let (a, b) = (self.slice(idx - 1), self.slice(idx));
            data.extend(a.iter().zip(b).map(|(a, b)| {
                Complex64::new(a.re + (b.re - a.re) * w, a.im + (b.im - a.im) * w)
            }));
        }
        Ok(Self::from_parts_unchecked(target.clone(), self.ports.clone(), data))
    }

    pub fn is_reciprocal(&self, tol: f64) -> bool {
        let n = self.n_ports();
        (0..self.n_freq()).all(|f| {
            let s = self.slice(f);
            (0..n).all(|i| (i + 1..n).all(|j| (s[i * n + j] - s[j * n + i]).norm() <= tol))
        })
    }

    /// Largest singular value of each frequency slice.
    pub fn max_singular_value(&self) -> Vec<f64> {
        let n = self.n_ports();
        (0..self.n_freq())
            .map(|f| {
                if n == 0 {
                    return 0.0;
                }
                DMatrix::from_row_slice(n, n, self.slice(f))
                    .singular_values()
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Largest entry of `|SᴴS − I|` over all frequencies.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.n_ports();
        let mut worst = 0.0f64;
        for f in 0..self.n_freq() {
            let s = self.slice(f);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..n {
                        acc += s[r * n + a].conj() * s[r * n + b];
                    }
                    if a == b {
                        acc -= 1.0;
                    }
                    worst = worst.max(acc.norm());
                }
            }
        }
        worst
    }

    /// Largest `|self − other|` entry; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &SMatrix) -> Option<f64> {
        if self.data.len() != other.data.len() || self.n_ports() != other.n_ports() {
            return None;
        }
        Some(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}
