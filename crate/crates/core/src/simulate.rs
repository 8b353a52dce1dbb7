//! Sweep simulation, result access and the direct-solve oracle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cascade::{evaluate_instances, reduce_circuit_parallel};
use crate::circuit::{PinRef, Subcircuit};
use crate::error::{Error, Result};
use crate::smatrix::{labels, wavelength_to_frequency, FrequencyGrid, SMatrix};

pub const DEFAULT_POINTS: usize = 2000;

/// Port budget of the dense oracle.
pub const DIRECT_SOLVE_MAX_PORTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// `start`/`stop` are wavelengths in metres.
    Wavelength,
    /// `start`/`stop` are frequencies in Hz.
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn new(start: f64, stop: f64, n_points: usize, mode: SweepMode) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start > 0.0) {
            return Err(Error::Sweep(format!("bounds must be positive and finite, got {start}..{stop}")));
        }
        if start >= stop {
            return Err(Error::Sweep(format!("start {start} must be below stop {stop}")));
        }
        if n_points < 2 {
            return Err(Error::Sweep(format!("need at least 2 points, got {n_points}")));
        }
        Ok(Self { start, stop, n_points, mode })
    }

    /// Wavelength sweep in metres.
    pub fn wavelength(start_m: f64, stop_m: f64, n_points: usize) -> Result<Self> {
        Self::new(start_m, stop_m, n_points, SweepMode::Wavelength)
    }

    /// Grid uniform in frequency spanning the requested band.
    pub fn grid(&self) -> Result<FrequencyGrid> {
        let (lo, hi) = match self.mode {
            SweepMode::Wavelength => (wavelength_to_frequency(self.stop), wavelength_to_frequency(self.start)),
            SweepMode::Frequency => (self.start, self.stop),
        };
        FrequencyGrid::linspace(lo, hi, self.n_points)
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Cascaded scattering matrix of a circuit over its external pins.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub s: SMatrix,
    pub pin_map: BTreeMap<String, usize>,
}

impl SweepResult {
    pub fn grid(&self) -> &FrequencyGrid {
        self.s.grid()
    }

    pub fn frequencies(&self) -> &[f64] {
        self.s.grid().points()
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        self.s.grid().wavelengths()
    }

    /// External pin names in port order.
    pub fn pins(&self) -> Vec<&str> {
        self.s.ports().iter().map(|p| p.as_str()).collect()
    }

    fn index(&self, pin: &str) -> Result<usize> {
        self.pin_map.get(pin).copied().ok_or_else(|| Error::UnknownPin(pin.to_string()))
    }

    /// Complex transmission from `in_pin` to `out_pin`; equal pins give the reflection.
    pub fn data(&self, in_pin: &str, out_pin: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let (j, i) = (self.index(in_pin)?, self.index(out_pin)?);
        Ok((self.frequencies().to_vec(), self.s.element(i, j)))
    }

    pub fn power(&self, in_pin: &str, out_pin: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let (f, s) = self.data(in_pin, out_pin)?;
        Ok((f, s.iter().map(|v| v.norm_sqr()).collect()))
    }

    /// `|S|²` against wavelength, with wavelength ascending.
    pub fn power_spectrum(&self, in_pin: &str, out_pin: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let (_, mut p) = self.power(in_pin, out_pin)?;
        let mut wl = self.wavelengths();
        wl.reverse();
        p.reverse();
        Ok((wl, p))
    }

    /// arg(S), optionally minus arg(S) towards `relative_to`, wrapped to (−π, π].
    pub fn phase(&self, in_pin: &str, out_pin: &str, relative_to: Option<&str>) -> Result<Vec<f64>> {
        let (_, s) = self.data(in_pin, out_pin)?;
        let reference = match relative_to {
            Some(r) => Some(self.data(in_pin, r)?.1),
            None => None,
        };
        Ok(s.iter()
            .enumerate()
            .map(|(f, v)| wrap_phase(v.arg() - reference.as_ref().map_or(0.0, |r| r[f].arg())))
            .collect())
    }
}

/// Flattens `circuit` and cascades it over the sweep band.
pub fn run_sweep(circuit: &Subcircuit, spec: &SweepSpec) -> Result<SweepResult> {
    let grid = spec.grid()?;
    simulate_grid(circuit, &grid)
}

/// Like [`run_sweep`] on an explicit grid.
pub fn simulate_grid(circuit: &Subcircuit, grid: &FrequencyGrid) -> Result<SweepResult> {
    let flat = circuit.flatten()?;
    let reduced = reduce_circuit_parallel(&flat, grid)?;
    Ok(SweepResult { s: reduced.s, pin_map: reduced.pin_map })
}

/// Waves at every component port of a flat circuit at one frequency:
/// `incident` enters the component through the port, `outgoing` leaves it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    /// `instance.pin` for every component port, in instance then pin order.
    pub ports: Vec<String>,
    pub incident: Vec<Complex64>,
    pub outgoing: Vec<Complex64>,
}

impl FieldVector {
    fn position(&self, port: &str) -> Option<usize> {
        self.ports.iter().position(|p| p == port)
    }

    pub fn incident(&self, port: &str) -> Option<Complex64> {
        self.position(port).map(|k| self.incident[k])
    }

    pub fn outgoing(&self, port: &str) -> Option<Complex64> {
        self.position(port).map(|k| self.outgoing[k])
    }
}

/// Linear system over all component ports of a flat circuit.
///
/// Unknowns are the incident amplitudes at every component port. A
/// connected port receives what its partner emits (`a_p = Σ S_q· a`); an
/// external port is driven directly.
struct DirectSystem {
    slices: Vec<SMatrix>,
    offset: Vec<usize>,
    owner: Vec<usize>,
    partner: Vec<Option<usize>>,
    total: usize,
}

impl DirectSystem {
    fn new(flat: &Subcircuit, grid: &FrequencyGrid) -> Result<Self> {
        if !flat.is_flat() {
            return Err(Error::Shape("direct solve needs a flat circuit".into()));
        }
        let slices = evaluate_instances(flat, grid)?;
        let mut offset = Vec::with_capacity(slices.len());
        let mut owner = Vec::new();
        for (i, s) in slices.iter().enumerate() {
            offset.push(owner.len());
            owner.extend(std::iter::repeat_n(i, s.n_ports()));
        }
        let total = owner.len();
        if total > DIRECT_SOLVE_MAX_PORTS {
            return Err(Error::Shape(format!("{total} ports exceed the direct-solve limit {DIRECT_SOLVE_MAX_PORTS}")));
        }
        let mut partner = vec![None; total];
        for c in flat.connections() {
            let (a, b) = (offset[c.a.instance] + c.a.pin, offset[c.b.instance] + c.b.pin);
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        Ok(Self { slices, offset, owner, partner, total })
    }

    fn global(&self, p: PinRef) -> usize {
        self.offset[p.instance] + p.pin
    }

    /// Incident amplitudes (`total × drives.len()`) for unit waves into each
    /// of the `drives` ports.
    fn incident(&self, grid: &FrequencyGrid, f: usize, drives: &[usize]) -> Result<DMatrix<Complex64>> {
        let total = self.total;
        let mut m = DMatrix::<Complex64>::identity(total, total);
        for g in 0..total {
            if let Some(q) = self.partner[g] {
                let inst = self.owner[q];
                let (s, base) = (&self.slices[inst], self.offset[inst]);
                for col in 0..s.n_ports() {
                    m[(g, base + col)] -= s.get(f, q - base, col);
                }
            }
        }
        let mut rhs = DMatrix::<Complex64>::zeros(total, drives.len());
        for (k, &g) in drives.iter().enumerate() {
            rhs[(g, k)] = Complex64::new(1.0, 0.0);
        }
        let singular = Error::SingularSystem { freq_hz: grid.points()[f] };
        let lu = m.lu();
        let min_pivot = lu.u().diagonal().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if total > 0 && !(min_pivot > 1e-12) {
            return Err(singular);
        }
        lu.solve(&rhs).ok_or(singular)
    }

    /// Wave leaving global port `g` for excitation column `j` of `incident`.
    fn outgoing(&self, f: usize, g: usize, incident: &DMatrix<Complex64>, j: usize) -> Complex64 {
        let inst = self.owner[g];
        let (s, base) = (&self.slices[inst], self.offset[inst]);
        (0..s.n_ports()).map(|col| s.get(f, g - base, col) * incident[(base + col, j)]).sum()
    }
}

/// Dense oracle for the whole external scattering matrix.
///
/// Solved once per frequency by LU with every external excitation as a
/// right-hand side. Ports follow [`Subcircuit::external_pins`] order.
pub fn direct_solve_matrix(flat: &Subcircuit, grid: &FrequencyGrid) -> Result<SMatrix> {
    let sys = DirectSystem::new(flat, grid)?;
    let external = flat.external_pins();
    let ext: Vec<usize> = external.iter().map(|e| sys.global(e.pin)).collect();
    let ne = ext.len();
    let names: Vec<String> = external.iter().map(|e| e.name.clone()).collect();

    let per_freq: Vec<Result<Vec<Complex64>>> = (0..grid.len())
        .into_par_iter()
        .map(|f| {
            let incident = sys.incident(grid, f, &ext)?;
            let mut out = vec![Complex64::default(); ne * ne];
            for (i, &g) in ext.iter().enumerate() {
                for j in 0..ne {
                    out[i * ne + j] = sys.outgoing(f, g, &incident, j);
                }
            }
            Ok(out)
        })
        .collect();
    let mut data = Vec::with_capacity(grid.len() * ne * ne);
    for r in per_freq {
        data.extend(r?);
    }
    SMatrix::new(grid.clone(), labels(&names)?, data)
}

/// Every port's incident and outgoing wave, per frequency, for a unit wave
/// into the external pin `in_pin`.
pub fn direct_solve(flat: &Subcircuit, grid: &FrequencyGrid, in_pin: &str) -> Result<Vec<FieldVector>> {
    let sys = DirectSystem::new(flat, grid)?;
    let drive = flat
        .external_pins()
        .into_iter()
        .find(|e| e.name == in_pin)
        .ok_or_else(|| Error::UnknownPin(in_pin.to_string()))?;
    let drive = sys.global(drive.pin);
    let mut ports = Vec::with_capacity(sys.total);
    for (i, inst) in flat.instances().iter().enumerate() {
        ports.extend((0..inst.pins().len()).map(|p| flat.pin_name(PinRef { instance: i, pin: p })));
    }
    (0..grid.len())
        .into_par_iter()
        .map(|f| {
            let a = sys.incident(grid, f, &[drive])?;
            Ok(FieldVector {
                ports: ports.clone(),
                incident: (0..sys.total).map(|g| a[(g, 0)]).collect(),
                outgoing: (0..sys.total).map(|g| sys.outgoing(f, g, &a, 0)).collect(),
            })
        })
        .collect()
}
