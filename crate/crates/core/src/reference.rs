//! Ready-made circuits: the scripted MZI, cascaded MZI chains, the 4×4
//! Green Machine butterfly and a multi-ring add-drop filter.

use std::sync::Arc;

use crate::circuit::Subcircuit;
use crate::error::Result;
use crate::models::{CompactModel, GratingParams, HalfRingParams, WaveguideParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziOptions {
    pub long: f64,
    pub short: f64,
    pub waveguide: WaveguideParams,
    pub grating: GratingParams,
}

impl Default for MziOptions {
    fn default() -> Self {
        Self { long: 150e-6, short: 50e-6, waveguide: WaveguideParams::default(), grating: GratingParams::default() }
    }
}

/// Grating in, y-branch split, two arms, y-branch recombine, grating out.
///
/// Built through the scripting API the same way a user would: one model per
/// device type, pins renamed, then six connections. External pins are
/// `input.input` and `output.output`.
pub fn mzi(opts: &MziOptions) -> Result<Subcircuit> {
    let grating = Arc::new(CompactModel::grating_coupler(opts.grating)?);
    let y = Arc::new(CompactModel::y_branch());
    let wg_long = Arc::new(CompactModel::waveguide(WaveguideParams { length: opts.long, ..opts.waveguide })?);
    let wg_short = Arc::new(CompactModel::waveguide(WaveguideParams { length: opts.short, ..opts.waveguide })?);

    let mut circuit = Subcircuit::new("MZI");
    circuit.add([
        (&grating, "input"),
        (&grating, "output"),
        (&y, "splitter"),
        (&y, "recombiner"),
        (&wg_long, "wg_long"),
        (&wg_short, "wg_short"),
    ])?;
    circuit.rename_pin("input", "n2", "input")?;
    circuit.rename_pin("output", "n2", "output")?;
    circuit.rename_all("splitter", &["in1", "out1", "out2"])?;
    circuit.rename_all("recombiner", &["out1", "in2", "in1"])?;
    circuit.connect_many(&[
        ("input", "n1", "splitter", "in1"),
        ("splitter", "out1", "wg_long", "n1"),
        ("splitter", "out2", "wg_short", "n1"),
        ("recombiner", "in1", "wg_long", "n2"),
        ("recombiner", "in2", "wg_short", "n2"),
        ("output", "n1", "recombiner", "out1"),
    ])?;
    Ok(circuit)
}

/// `count` MZIs in series, each joined to the next by a waveguide of
/// `link_length`, between two grating couplers. External pins are
/// `input` and `output`.
pub fn mzi_chain(count: usize, opts: &MziOptions, link_length: f64) -> Result<Subcircuit> {
    let grating = Arc::new(CompactModel::grating_coupler(opts.grating)?);
    let y = Arc::new(CompactModel::y_branch());
    let wg_long = Arc::new(CompactModel::waveguide(WaveguideParams { length: opts.long, ..opts.waveguide })?);
    let wg_short = Arc::new(CompactModel::waveguide(WaveguideParams { length: opts.short, ..opts.waveguide })?);
    let link = Arc::new(CompactModel::waveguide(WaveguideParams { length: link_length, ..opts.waveguide })?);

    let mut c = Subcircuit::new(format!("mzi_chain_{count}"));
    c.add_one(&grating, "gc_in")?;
    let mut prev = ("gc_in".to_string(), "n1");
    for m in 0..count {
        let (split, long, short, comb) =
            (format!("y_split_{m}"), format!("wg_long_{m}"), format!("wg_short_{m}"), format!("y_comb_{m}"));
        c.add([(&y, &split), (&wg_long, &long), (&wg_short, &short), (&y, &comb)])?;
        c.connect_many(&[
            (prev.0.as_str(), prev.1, split.as_str(), "n1"),
            (split.as_str(), "n2", long.as_str(), "n1"),
            (split.as_str(), "n3", short.as_str(), "n1"),
            (comb.as_str(), "n2", long.as_str(), "n2"),
            (comb.as_str(), "n3", short.as_str(), "n2"),
        ])?;
        if m + 1 < count {
            let l = format!("link_{m}");
            c.add_one(&link, &l)?;
            c.connect(&comb, "n1", &l, "n1")?;
            prev = (l, "n2");
        } else {
            prev = (comb, "n1");
        }
    }
    c.add_one(&grating, "gc_out")?;
    c.connect("gc_out", "n1", &prev.0, prev.1)?;
    c.set_port_alias("gc_in", "n2", "input")?;
    c.set_port_alias("gc_out", "n2", "output")?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenMachineOptions {
    /// Every interconnect waveguide segment has this length.
    pub segment_length: f64,
    /// Added to one segment of each bypass path; zero keeps all paths equal.
    pub bypass_mismatch: f64,
    pub crosstalk: f64,
    pub coupling: f64,
    pub waveguide: WaveguideParams,
    pub grating: GratingParams,
}

impl Default for GreenMachineOptions {
    fn default() -> Self {
        Self {
            segment_length: 20e-6,
            bypass_mismatch: 0.0,
            crosstalk: 0.0,
            coupling: 0.5,
            waveguide: WaveguideParams::default(),
            grating: GratingParams::default(),
        }
    }
}

/// Two-stage 4×4 butterfly: grating couplers on ports `p0`..`p7`, couplers on
/// inputs (0,1) and (2,3), a crossover exchanging the middle pair, and a
/// second coupler stage feeding outputs (4,5) and (6,7).
///
/// The paths that skip the crossover use two segments in series so every
/// input-to-output path crosses the same number of equal segments.
pub fn green_machine(opts: &GreenMachineOptions) -> Result<Subcircuit> {
    let gc = Arc::new(CompactModel::grating_coupler(opts.grating)?);
    let dc = Arc::new(CompactModel::directional_coupler(opts.coupling)?);
    let cross = Arc::new(CompactModel::crossover(opts.crosstalk)?);
    let seg = Arc::new(CompactModel::waveguide(WaveguideParams { length: opts.segment_length, ..opts.waveguide })?);
    let long_seg = Arc::new(CompactModel::waveguide(WaveguideParams {
        length: opts.segment_length + opts.bypass_mismatch,
        ..opts.waveguide
    })?);

    let mut c = Subcircuit::new("green_machine");
    for p in 0..8 {
        c.add([(&gc, format!("gc{p}")), (&seg, format!("wg_io{p}"))])?;
        c.connect(&format!("gc{p}"), "n1", &format!("wg_io{p}"), "n1")?;
        c.set_port_alias(&format!("gc{p}"), "n2", &format!("p{p}"))?;
    }
    c.add([(&dc, "dc_a"), (&dc, "dc_b"), (&dc, "dc_c"), (&dc, "dc_d")])?;
    c.add([(&cross, "cross")])?;
    c.add([
        (&seg, "wg_xa"),
        (&seg, "wg_xb"),
        (&seg, "wg_xc"),
        (&seg, "wg_xd"),
        (&long_seg, "wg_bypass_a1"),
        (&seg, "wg_bypass_a2"),
        (&long_seg, "wg_bypass_b1"),
        (&seg, "wg_bypass_b2"),
    ])?;
    c.connect_many(&[
        // inputs into the first stage
        ("wg_io0", "n2", "dc_a", "n1"),
        ("wg_io1", "n2", "dc_a", "n2"),
        ("wg_io2", "n2", "dc_b", "n1"),
        ("wg_io3", "n2", "dc_b", "n2"),
        // outer paths skip the crossover
        ("dc_a", "n3", "wg_bypass_a1", "n1"),
        ("wg_bypass_a1", "n2", "wg_bypass_a2", "n1"),
        ("wg_bypass_a2", "n2", "dc_c", "n1"),
        ("dc_b", "n4", "wg_bypass_b1", "n1"),
        ("wg_bypass_b1", "n2", "wg_bypass_b2", "n1"),
        ("wg_bypass_b2", "n2", "dc_d", "n2"),
        // inner pair exchanged by the crossover
        ("dc_a", "n4", "wg_xa", "n1"),
        ("wg_xa", "n2", "cross", "n1"),
        ("dc_b", "n3", "wg_xb", "n1"),
        ("wg_xb", "n2", "cross", "n2"),
        ("cross", "n3", "wg_xc", "n1"),
        ("wg_xc", "n2", "dc_c", "n2"),
        ("cross", "n4", "wg_xd", "n1"),
        ("wg_xd", "n2", "dc_d", "n1"),
        // second stage to outputs
        ("dc_c", "n3", "wg_io4", "n2"),
        ("dc_c", "n4", "wg_io5", "n2"),
        ("dc_d", "n3", "wg_io6", "n2"),
        ("dc_d", "n4", "wg_io7", "n2"),
    ])?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingOptions {
    pub radius: f64,
    pub coupling: f64,
    pub waveguide: WaveguideParams,
}

impl RingOptions {
    pub fn new(radius: f64, coupling: f64) -> Self {
        Self { radius, coupling, waveguide: WaveguideParams::default() }
    }
}

/// Add-drop ring from two half-rings joined at their ring ports.
/// External pins: `input`, `through`, `drop`, `add`.
pub fn add_drop_ring(opts: &RingOptions) -> Result<Subcircuit> {
    let half = Arc::new(CompactModel::half_ring(HalfRingParams {
        radius: opts.radius,
        coupling: opts.coupling,
        waveguide: opts.waveguide,
    })?);
    let mut c = Subcircuit::new(format!("ring_{:.0}nm", opts.radius * 1e9));
    c.add([(&half, "bus_in"), (&half, "bus_out")])?;
    c.connect_many(&[("bus_in", "n3", "bus_out", "n3"), ("bus_in", "n4", "bus_out", "n4")])?;
    c.set_port_alias("bus_in", "n1", "input")?;
    c.set_port_alias("bus_in", "n2", "through")?;
    c.set_port_alias("bus_out", "n1", "drop")?;
    c.set_port_alias("bus_out", "n2", "add")?;
    Ok(c)
}

/// Rings in series along one bus, joined by `link_length` waveguides, with
/// their add ports terminated. External pins: `input`, `drop1`..`dropN`,
/// `through`.
pub fn ring_filter(rings: &[RingOptions], link_length: f64) -> Result<Subcircuit> {
    let link = Arc::new(CompactModel::waveguide(WaveguideParams {
        length: link_length,
        ..rings.first().map(|r| r.waveguide).unwrap_or_default()
    })?);
    let term = Arc::new(CompactModel::terminator());
    let mut c = Subcircuit::new("ring_filter");
    for (k, opts) in rings.iter().enumerate() {
        let ring = format!("ring{}", k + 1);
        let t = format!("term{}", k + 1);
        c.add_one(Arc::new(add_drop_ring(opts)?), &ring)?;
        c.add_one(&term, &t)?;
        c.connect(&ring, "add", &t, "n1")?;
        if k > 0 {
            let l = format!("link{k}");
            c.add_one(&link, &l)?;
            c.connect(&format!("ring{k}"), "through", &l, "n1")?;
            c.connect(&l, "n2", &ring, "input")?;
        }
        c.set_port_alias(&ring, "drop", &format!("drop{}", k + 1))?;
    }
    if !rings.is_empty() {
        c.set_port_alias("ring1", "input", "input")?;
        c.set_port_alias(&format!("ring{}", rings.len()), "through", "through")?;
    }
    Ok(c)
}
