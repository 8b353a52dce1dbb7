//! Compact model library.
//!
//! Every model is an immutable, parameterized generator of [`SMatrix`] data.
//! The analytic models are reciprocal and passive; the directional coupler
//! and crossover are also lossless. A file-backed model interpolates tabulated
//! data read from the `.sparam` text format (see [`read_sparam`]).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smatrix::{frequency_to_wavelength, labels, FrequencyGrid, PortLabel, SMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Silicon strip waveguide with a quadratic effective-index model around `lambda0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideParams {
    /// m
    pub length: f64,
    pub n0: f64,
    /// dn_eff/dλ, 1/m
    pub dn_dlambda: f64,
    /// d²n_eff/dλ², 1/m²
    pub d2n_dlambda2: f64,
    /// propagation loss, dB/m
    pub loss: f64,
    /// m
    pub lambda0: f64,
}

impl Default for WaveguideParams {
    fn default() -> Self {
        Self {
            length: 0.0,
            n0: 2.45,
            dn_dlambda: -1.13e6,
            d2n_dlambda2: 0.0,
            loss: 300.0,
            lambda0: 1.55e-6,
        }
    }
}

impl WaveguideParams {
    pub fn with_length(length: f64) -> Self {
        Self { length, ..Self::default() }
    }

    pub fn lossless(self) -> Self {
        Self { loss: 0.0, ..self }
    }

    pub fn n_eff(&self, wavelength: f64) -> f64 {
        let d = wavelength - self.lambda0;
        self.n0 + self.dn_dlambda * d + 0.5 * self.d2n_dlambda2 * d * d
    }

    /// n_g = n_eff − λ·dn_eff/dλ
    pub fn group_index(&self, wavelength: f64) -> f64 {
        let d = wavelength - self.lambda0;
        let slope = self.dn_dlambda + self.d2n_dlambda2 * d;
        self.n_eff(wavelength) - wavelength * slope
    }

    /// Complex transmission over `length` metres at `freq_hz`.
    pub fn propagate(&self, length: f64, freq_hz: f64) -> Complex64 {
        let lambda = frequency_to_wavelength(freq_hz);
        let phase = 2.0 * PI * self.n_eff(lambda) * length / lambda;
        let amplitude = 10f64.powf(-self.loss * length / 20.0);
        Complex64::from_polar(amplitude, phase)
    }

    fn validate(&self, check_length: bool) -> Result<()> {
        if check_length {
            in_range("length", self.length, 0.0, 1.0)?;
        }
        finite("n0", self.n0)?;
        finite("dn_dlambda", self.dn_dlambda)?;
        finite("d2n_dlambda2", self.d2n_dlambda2)?;
        at_least("loss", self.loss, 0.0)?;
        positive("lambda0", self.lambda0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingParams {
    /// m
    pub center_wavelength: f64,
    /// dB
    pub peak_loss: f64,
    /// full 1 dB bandwidth, m
    pub bandwidth_1db: f64,
}

impl Default for GratingParams {
    fn default() -> Self {
        Self { center_wavelength: 1.55e-6, peak_loss: 3.0, bandwidth_1db: 35e-9 }
    }
}

impl GratingParams {
    /// Insertion loss in dB, parabolic in wavelength.
    pub fn insertion_loss(&self, wavelength: f64) -> f64 {
        let x = (wavelength - self.center_wavelength) / (self.bandwidth_1db / 2.0);
        self.peak_loss + x * x
    }

    pub fn transmission(&self, freq_hz: f64) -> f64 {
        10f64.powf(-self.insertion_loss(frequency_to_wavelength(freq_hz)) / 20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfRingParams {
    /// m
    pub radius: f64,
    /// power coupling fraction κ²
    pub coupling: f64,
    /// ring waveguide; `length` is ignored
    pub waveguide: WaveguideParams,
}

impl HalfRingParams {
    pub fn new(radius: f64, coupling: f64) -> Self {
        Self { radius, coupling, waveguide: WaveguideParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Waveguide(WaveguideParams),
    YBranch,
    DirectionalCoupler { coupling: f64 },
    GratingCoupler(GratingParams),
    HalfRing(HalfRingParams),
    Crossover { crosstalk: f64 },
    Terminator,
    File { path: Option<PathBuf>, data: SMatrix },
}

/// A parameterized device model with default port names.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactModel {
    kind: ModelKind,
    ports: Vec<PortLabel>,
}

fn default_ports(names: &[&str]) -> Vec<PortLabel> {
    labels(names).expect("static port names are valid")
}

fn param_err(name: &str, value: f64, reason: &str) -> Error {
    Error::Param { name: name.to_string(), value, reason: reason.to_string() }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(param_err(name, v, "must be finite"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(param_err(name, v, "must be positive"))
    }
}

fn at_least(name: &str, v: f64, lo: f64) -> Result<()> {
    if v.is_finite() && v >= lo {
        Ok(())
    } else {
        Err(param_err(name, v, &format!("must be >= {lo}")))
    }
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(param_err(name, v, &format!("must lie in [{lo}, {hi}]")))
    }
}

impl CompactModel {
    /// Two ports `n1`, `n2`.
    pub fn waveguide(params: WaveguideParams) -> Result<Self> {
        params.validate(true)?;
        Ok(Self { kind: ModelKind::Waveguide(params), ports: default_ports(&["n1", "n2"]) })
    }

    /// Ideal 50/50 splitter: stem `n1`, arms `n2`, `n3`.
    pub fn y_branch() -> Self {
        Self { kind: ModelKind::YBranch, ports: default_ports(&["n1", "n2", "n3"]) }
    }

    /// Lossless coupler. `n1`→`n3` and `n2`→`n4` are through paths with
    /// amplitude √(1−coupling); the cross paths carry i·√coupling.
    pub fn directional_coupler(coupling: f64) -> Result<Self> {
        in_range("coupling", coupling, 0.0, 1.0)?;
        Ok(Self {
            kind: ModelKind::DirectionalCoupler { coupling },
            ports: default_ports(&["n1", "n2", "n3", "n4"]),
        })
    }

    /// Waveguide side `n1`, fiber side `n2`.
    pub fn grating_coupler(params: GratingParams) -> Result<Self> {
        positive("center_wavelength", params.center_wavelength)?;
        at_least("peak_loss", params.peak_loss, 0.0)?;
        positive("bandwidth_1db", params.bandwidth_1db)?;
        Ok(Self { kind: ModelKind::GratingCoupler(params), ports: default_ports(&["n1", "n2"]) })
    }

    /// Bus ports `n1`, `n2`; ring ports `n3`, `n4`.
    ///
    /// A point coupler joins the bus to the ring. The whole half
    /// circumference (π·radius) sits between the coupler and `n4`, so
    /// `n1`→`n4` carries i·κ times the half-ring propagation while
    /// `n2`→`n3` carries i·κ alone. Joining two half-rings `n3`↔`n3`,
    /// `n4`↔`n4` closes a ring of circumference 2π·radius.
    pub fn half_ring(params: HalfRingParams) -> Result<Self> {
        in_range("radius", params.radius, 1e-6, 1e-3)?;
        in_range("coupling", params.coupling, 0.0, 1.0)?;
        params.waveguide.validate(false)?;
        Ok(Self { kind: ModelKind::HalfRing(params), ports: default_ports(&["n1", "n2", "n3", "n4"]) })
    }

    /// Waveguide crossing with the coupler's port layout: `n1`→`n4` and
    /// `n2`→`n3` cross with amplitude √(1−crosstalk); the bar paths carry
    /// i·√crosstalk.
    pub fn crossover(crosstalk: f64) -> Result<Self> {
        in_range("crosstalk", crosstalk, 0.0, 1.0)?;
        Ok(Self {
            kind: ModelKind::Crossover { crosstalk },
            ports: default_ports(&["n1", "n2", "n3", "n4"]),
        })
    }

    /// Perfect absorber, one port `n1`.
    pub fn terminator() -> Self {
        Self { kind: ModelKind::Terminator, ports: default_ports(&["n1"]) }
    }

    /// Model backed by tabulated data; evaluation interpolates.
    pub fn from_smatrix(data: SMatrix, path: Option<PathBuf>) -> Self {
        let ports = data.ports().to_vec();
        Self { kind: ModelKind::File { path, data }, ports }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn ports(&self) -> &[PortLabel] {
        &self.ports
    }

    pub fn n_ports(&self) -> usize {
        self.ports.len()
    }

    /// Netlist keyword of this model family.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Waveguide(_) => "waveguide",
            ModelKind::YBranch => "y_branch",
            ModelKind::DirectionalCoupler { .. } => "directional_coupler",
            ModelKind::GratingCoupler(_) => "grating_coupler",
            ModelKind::HalfRing(_) => "half_ring",
            ModelKind::Crossover { .. } => "crossover",
            ModelKind::Terminator => "terminator",
            ModelKind::File { .. } => "sparam_file",
        }
    }

    /// Named numeric parameters (SI units) in a stable order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        fn wg(p: &WaveguideParams, with_length: bool) -> Vec<(&'static str, f64)> {
            let mut v = Vec::with_capacity(6);
            if with_length {
                v.push(("length", p.length));
            }
            v.extend([
                ("n0", p.n0),
                ("dn_dlambda", p.dn_dlambda),
                ("d2n_dlambda2", p.d2n_dlambda2),
                ("loss", p.loss),
                ("lambda0", p.lambda0),
            ]);
            v
        }
        match &self.kind {
            ModelKind::Waveguide(p) => wg(p, true),
            ModelKind::YBranch | ModelKind::Terminator | ModelKind::File { .. } => Vec::new(),
            ModelKind::DirectionalCoupler { coupling } => vec![("coupling", *coupling)],
            ModelKind::GratingCoupler(p) => vec![
                ("center_wavelength", p.center_wavelength),
                ("peak_loss", p.peak_loss),
                ("bandwidth_1db", p.bandwidth_1db),
            ],
            ModelKind::HalfRing(p) => {
                let mut v = vec![("radius", p.radius), ("coupling", p.coupling)];
                v.extend(wg(&p.waveguide, false));
                v
            }
            ModelKind::Crossover { crosstalk } => vec![("crosstalk", *crosstalk)],
        }
    }

    /// Builds a model from its netlist keyword and `key=value` parameters.
    /// `sparam_file` is handled by the caller since it takes a path.
    pub fn from_params(kind: &str, params: &[(String, f64)]) -> Result<Self> {
        let mut remaining: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut take = |key: &str| -> Option<f64> {
            let pos = remaining.iter().position(|(k, _)| *k == key)?;
            Some(remaining.remove(pos).1)
        };
        let model = match kind {
            "waveguide" => {
                if !params.iter().any(|(k, _)| k == "length") {
                    return Err(param_err("length", f64::NAN, "required for waveguide"));
                }
                let p = waveguide_from(&mut take);
                Self::waveguide(p)?
            }
            "y_branch" => Self::y_branch(),
            "directional_coupler" => Self::directional_coupler(take("coupling").unwrap_or(0.5))?,
            "grating_coupler" => {
                let d = GratingParams::default();
                Self::grating_coupler(GratingParams {
                    center_wavelength: take("center_wavelength").unwrap_or(d.center_wavelength),
                    peak_loss: take("peak_loss").unwrap_or(d.peak_loss),
                    bandwidth_1db: take("bandwidth_1db").unwrap_or(d.bandwidth_1db),
                })?
            }
            "half_ring" => {
                let radius = take("radius").unwrap_or(10e-6);
                let coupling = take("coupling").unwrap_or(0.1);
                if let Some(len) = take("length") {
                    return Err(param_err("length", len, "not a half_ring parameter"));
                }
                let waveguide = waveguide_from(&mut take);
                Self::half_ring(HalfRingParams { radius, coupling, waveguide })?
            }
            "crossover" => Self::crossover(take("crosstalk").unwrap_or(0.0))?,
            "terminator" => Self::terminator(),
            other => {
                return Err(Error::Param {
                    name: other.to_string(),
                    value: f64::NAN,
                    reason: "unknown model kind".into(),
                })
            }
        };
        if let Some((k, v)) = remaining.first() {
            return Err(param_err(k, *v, &format!("not a {kind} parameter")));
        }
        Ok(model)
    }

    pub fn file_path(&self) -> Option<&Path> {
        match &self.kind {
            ModelKind::File { path, .. } => path.as_deref(),
            _ => None,
        }
    }

    /// Samples the model on `grid`.
    pub fn evaluate(&self, grid: &FrequencyGrid) -> Result<SMatrix> {
        let ports = self.ports.clone();
        let j = Complex64::i();
        match &self.kind {
            ModelKind::Waveguide(p) => SMatrix::from_slices(grid.clone(), ports, |f, s| {
                let t = p.propagate(p.length, f);
                s[1] = t;
                s[2] = t;
            }),
            ModelKind::YBranch => {
                let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
                SMatrix::constant(grid.clone(), ports, &[ZERO, r, r, r, ZERO, ZERO, r, ZERO, ZERO])
            }
            ModelKind::DirectionalCoupler { coupling } => {
                let t = Complex64::new((1.0 - coupling).sqrt(), 0.0);
                let k = j * coupling.sqrt();
                SMatrix::constant(grid.clone(), ports, &four_port(t, k))
            }
            ModelKind::Crossover { crosstalk } => {
                let bar = j * crosstalk.sqrt();
                let cross = Complex64::new((1.0 - crosstalk).sqrt(), 0.0);
                SMatrix::constant(grid.clone(), ports, &four_port(bar, cross))
            }
            ModelKind::GratingCoupler(p) => SMatrix::from_slices(grid.clone(), ports, |f, s| {
                let t = Complex64::new(p.transmission(f), 0.0);
                s[1] = t;
                s[2] = t;
            }),
            ModelKind::HalfRing(p) => {
                let t = Complex64::new((1.0 - p.coupling).sqrt(), 0.0);
                let k = j * p.coupling.sqrt();
                let half = PI * p.radius;
                SMatrix::from_slices(grid.clone(), ports, |f, s| {
                    let w = p.waveguide.propagate(half, f);
                    let mut set = |a: usize, b: usize, v: Complex64| {
                        s[a * 4 + b] = v;
                        s[b * 4 + a] = v;
                    };
                    set(0, 1, t);
                    set(0, 3, k * w);
                    set(1, 2, k);
                    set(2, 3, t * w);
                })
            }
            ModelKind::Terminator => SMatrix::zeros(grid.clone(), ports),
            ModelKind::File { data, .. } => data.interpolate(grid),
        }
    }
}

fn waveguide_from(take: &mut impl FnMut(&str) -> Option<f64>) -> WaveguideParams {
    let d = WaveguideParams::default();
    WaveguideParams {
        length: take("length").unwrap_or(d.length),
        n0: take("n0").unwrap_or(d.n0),
        dn_dlambda: take("dn_dlambda").unwrap_or(d.dn_dlambda),
        d2n_dlambda2: take("d2n_dlambda2").unwrap_or(d.d2n_dlambda2),
        loss: take("loss").unwrap_or(d.loss),
        lambda0: take("lambda0").unwrap_or(d.lambda0),
    }
}

/// Symmetric 4-port with `n1`↔`n3`, `n2`↔`n4` = `bar` and `n1`↔`n4`, `n2`↔`n3` = `cross`.
fn four_port(bar: Complex64, cross: Complex64) -> [Complex64; 16] {
    let z = ZERO;
    [
        z, z, bar, cross, //
        z, z, cross, bar, //
        bar, cross, z, z, //
        cross, bar, z, z,
    ]
}

const SPARAM_MAGIC: &str = "sparam v1";

/// Serializes `s` in the `.sparam` text format with 17 significant digits.
pub fn write_sparam(s: &SMatrix) -> String {
    let names: Vec<&str> = s.ports().iter().map(PortLabel::as_str).collect();
    let mut out = format!("{SPARAM_MAGIC} ports={} names={}\n", s.n_ports(), names.join(","));
    for (f, &freq) in s.grid().points().iter().enumerate() {
        write!(out, "{freq:.16e}").unwrap();
        for v in s.slice(f) {
            write!(out, " {:.16e} {:.16e}", v.re, v.im).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the `.sparam` text format.
pub fn read_sparam(text: &str) -> Result<SMatrix> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing sparam header".into()))?;
    let rest = header
        .strip_prefix(SPARAM_MAGIC)
        .ok_or_else(|| perr(hline, format!("expected header starting with {SPARAM_MAGIC:?}")))?;
    let mut n_ports = None;
    let mut names = None;
    for tok in rest.split_whitespace() {
        match tok.split_once('=') {
            Some(("ports", v)) => {
                n_ports = Some(v.parse::<usize>().map_err(|_| perr(hline, format!("bad port count {v:?}")))?)
            }
            Some(("names", v)) => {
                names = Some(if v.is_empty() { Vec::new() } else { v.split(',').collect::<Vec<_>>() })
            }
            _ => return Err(perr(hline, format!("unexpected header token {tok:?}"))),
        }
    }
    let n = n_ports.ok_or_else(|| perr(hline, "header lacks ports=".into()))?;
    let names = names.unwrap_or_default();
    if names.len() != n {
        return Err(perr(hline, format!("ports={n} but {} names given", names.len())));
    }
    let ports = labels(&names).map_err(|e| perr(hline, e.to_string()))?;

    let mut freqs = Vec::new();
    let mut data = Vec::new();
    for (ln, line) in lines {
        let fields = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(ln, format!("bad number {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != 1 + 2 * n * n {
            return Err(perr(ln, format!("expected {} fields, found {}", 1 + 2 * n * n, fields.len())));
        }
        if let Some(&prev) = freqs.last() {
            if fields[0] <= prev {
                return Err(perr(ln, "frequencies must be strictly increasing".into()));
            }
        }
        freqs.push(fields[0]);
        data.extend(fields[1..].chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
    }
    if freqs.is_empty() {
        return Err(perr(hline, "no data rows".into()));
    }
    let grid = FrequencyGrid::new(freqs).map_err(|e| perr(hline, e.to_string()))?;
    let s = SMatrix::new(grid, ports, data).map_err(|e| perr(hline, e.to_string()))?;
    Ok(s)
}

pub fn save_sparam_file(path: impl AsRef<Path>, s: &SMatrix) -> Result<()> {
    std::fs::write(path, write_sparam(s))?;
    Ok(())
}

/// Loads a `.sparam` file as a file-backed model.
pub fn load_sparam_file(path: impl AsRef<Path>) -> Result<CompactModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let s = read_sparam(&text)?;
    Ok(CompactModel::from_smatrix(s, Some(path.to_path_buf())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smatrix::{wavelength_to_frequency, SPEED_OF_LIGHT};

    fn band() -> FrequencyGrid {
        FrequencyGrid::linspace(wavelength_to_frequency(1.6e-6), wavelength_to_frequency(1.5e-6), 41).unwrap()
    }

    fn all_analytic() -> Vec<CompactModel> {
        vec![
            CompactModel::waveguide(WaveguideParams::with_length(123e-6)).unwrap(),
            CompactModel::y_branch(),
            CompactModel::directional_coupler(0.3).unwrap(),
            CompactModel::grating_coupler(GratingParams::default()).unwrap(),
            CompactModel::half_ring(HalfRingParams::new(10e-6, 0.2)).unwrap(),
            CompactModel::crossover(0.05).unwrap(),
            CompactModel::terminator(),
        ]
    }

    #[test]
    fn zero_length_waveguide_is_identity_through() {
        let s = CompactModel::waveguide(WaveguideParams::with_length(0.0)).unwrap().evaluate(&band()).unwrap();
        for f in 0..s.n_freq() {
            assert_eq!(s.get(f, 0, 1), Complex64::new(1.0, 0.0));
            assert_eq!(s.get(f, 1, 0), Complex64::new(1.0, 0.0));
            assert_eq!(s.get(f, 0, 0), ZERO);
        }
    }

    #[test]
    fn default_group_index() {
        // n_g = n0 − λ0·dn/dλ = 2.45 + 1.55e-6·1.13e6
        let p = WaveguideParams::with_length(100e-6);
        assert!((p.group_index(1.55e-6) - 4.2015).abs() < 1e-12);
        // finite-difference check of the derivative inside group_index
        let h = 1e-12;
        let slope = (p.n_eff(1.55e-6 + h) - p.n_eff(1.55e-6 - h)) / (2.0 * h);
        assert!((p.n_eff(1.55e-6) - 1.55e-6 * slope - 4.2015).abs() < 1e-6);
    }

    #[test]
    fn waveguide_loss_and_phase() {
        let p = WaveguideParams { length: 1e-3, ..WaveguideParams::default() };
        let f = wavelength_to_frequency(1.55e-6);
        let t = p.propagate(p.length, f);
        assert!((t.norm_sqr() - 10f64.powf(-0.03)).abs() < 1e-12);
        let expected_phase = 2.0 * PI * 2.45 * 1e-3 * f / SPEED_OF_LIGHT;
        let diff = (t.arg() - expected_phase).rem_euclid(2.0 * PI);
        assert!(diff < 1e-9 || 2.0 * PI - diff < 1e-9);
    }

    #[test]
    fn y_branch_splits_evenly() {
        let s = CompactModel::y_branch().evaluate(&band()).unwrap();
        assert!((s.get(0, 1, 0).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.get(0, 2, 0).norm_sqr() - 0.5).abs() < 1e-15);
        assert_eq!(s.get(0, 1, 2), ZERO);
        assert_eq!(s.get(0, 2, 1), ZERO);
    }

    #[test]
    fn coupler_limits() {
        let g = FrequencyGrid::single(1.9e14).unwrap();
        let s = CompactModel::directional_coupler(0.0).unwrap().evaluate(&g).unwrap();
        assert_eq!(s.get(0, 2, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.get(0, 3, 1), Complex64::new(1.0, 0.0));
        assert_eq!(s.get(0, 3, 0).norm(), 0.0);

        let s = CompactModel::directional_coupler(0.5).unwrap().evaluate(&g).unwrap();
        assert!((s.get(0, 2, 0).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.get(0, 3, 0).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.get(0, 3, 0).arg() - s.get(0, 2, 0).arg() - PI / 2.0).abs() < 1e-15);

        let s = CompactModel::directional_coupler(1.0).unwrap().evaluate(&g).unwrap();
        assert_eq!(s.get(0, 2, 0).norm(), 0.0);
        assert_eq!(s.get(0, 3, 0), Complex64::new(0.0, 1.0));
        assert!(CompactModel::directional_coupler(1.5).is_err());
    }

    #[test]
    fn crossover_limits() {
        let g = FrequencyGrid::single(1.9e14).unwrap();
        let s = CompactModel::crossover(0.0).unwrap().evaluate(&g).unwrap();
        assert_eq!(s.get(0, 3, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.get(0, 2, 1), Complex64::new(1.0, 0.0));
        assert_eq!(s.get(0, 2, 0).norm(), 0.0);
        let s = CompactModel::crossover(1.0).unwrap().evaluate(&g).unwrap();
        assert_eq!(s.get(0, 3, 0).norm(), 0.0);
        assert_eq!(s.get(0, 2, 0).norm(), 1.0);
    }

    #[test]
    fn grating_envelope() {
        let p = GratingParams { center_wavelength: 1.55e-6, peak_loss: 3.0, bandwidth_1db: 40e-9 };
        let m = CompactModel::grating_coupler(p).unwrap();
        let g = FrequencyGrid::single(wavelength_to_frequency(1.55e-6)).unwrap();
        let s = m.evaluate(&g).unwrap();
        assert!((s.get(0, 0, 1).norm_sqr() - 10f64.powf(-0.3)).abs() < 1e-12);
        assert!((p.insertion_loss(1.55e-6 + 20e-9) - 4.0).abs() < 1e-9);
        assert!((p.insertion_loss(1.55e-6 - 20e-9) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn half_ring_zero_coupling_isolates_ring() {
        let s = CompactModel::half_ring(HalfRingParams::new(10e-6, 0.0)).unwrap().evaluate(&band()).unwrap();
        for f in 0..s.n_freq() {
            assert_eq!(s.get(f, 1, 0), Complex64::new(1.0, 0.0));
            for bus in 0..2 {
                for ring in 2..4 {
                    assert_eq!(s.get(f, ring, bus).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn terminator_absorbs() {
        let s = CompactModel::terminator().evaluate(&band()).unwrap();
        assert!(s.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn analytic_models_reciprocal_and_passive() {
        for m in all_analytic() {
            let s = m.evaluate(&band()).unwrap();
            assert!(s.is_reciprocal(1e-15), "{}", m.kind_name());
            assert!(s.max_singular_value().iter().all(|&v| v <= 1.0 + 1e-12), "{}", m.kind_name());
            assert_eq!(s.ports(), m.ports());
        }
        for m in [CompactModel::directional_coupler(0.37).unwrap(), CompactModel::crossover(0.11).unwrap()] {
            assert!(m.evaluate(&band()).unwrap().unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(CompactModel::waveguide(WaveguideParams::with_length(-1e-6)).is_err());
        assert!(CompactModel::waveguide(WaveguideParams::with_length(1.5)).is_err());
        assert!(CompactModel::waveguide(WaveguideParams { loss: -1.0, ..WaveguideParams::default() }).is_err());
        assert!(CompactModel::half_ring(HalfRingParams::new(0.5e-6, 0.1)).is_err());
        assert!(CompactModel::half_ring(HalfRingParams::new(2e-3, 0.1)).is_err());
        assert!(CompactModel::half_ring(HalfRingParams::new(10e-6, -0.1)).is_err());
        assert!(CompactModel::crossover(1.1).is_err());
        assert!(CompactModel::grating_coupler(GratingParams { bandwidth_1db: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn from_params_round_trips_params() {
        for m in all_analytic() {
            let params: Vec<(String, f64)> = m.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            let again = CompactModel::from_params(m.kind_name(), &params).unwrap();
            assert_eq!(again, m);
        }
        assert!(CompactModel::from_params("waveguide", &[("width".into(), 1.0)]).is_err());
        assert!(CompactModel::from_params("laser", &[]).is_err());
    }

    #[test]
    fn sparam_round_trip_is_exact() {
        let m = CompactModel::half_ring(HalfRingParams::new(12e-6, 0.3)).unwrap();
        let s = m.evaluate(&band()).unwrap();
        let back = read_sparam(&write_sparam(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sparam_rejects_malformed() {
        let err = read_sparam("sparam v1 ports=1 names=a\n2e14 0 0\n1e14 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_sparam("sparam v1 ports=1 names=a\n# c\n1e14 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(read_sparam("sparam v1 ports=2 names=a\n").is_err());
        assert!(read_sparam("touchstone\n").is_err());
        assert!(read_sparam("sparam v1 ports=1 names=a\n").is_err());
        assert!(read_sparam("sparam v1 ports=1 names=a\n1e14 0 x\n").is_err());
    }

    #[test]
    fn file_model_rejects_out_of_span() {
        let s = CompactModel::y_branch().evaluate(&FrequencyGrid::linspace(1.9e14, 2.0e14, 3).unwrap()).unwrap();
        let m = CompactModel::from_smatrix(read_sparam(&write_sparam(&s)).unwrap(), None);
        assert!(matches!(m.evaluate(&FrequencyGrid::single(2.1e14).unwrap()), Err(Error::Range { .. })));
        assert_eq!(m.evaluate(&FrequencyGrid::single(1.95e14).unwrap()).unwrap().n_ports(), 3);
    }
}
