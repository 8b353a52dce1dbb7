//! Sub-network growth.
//!
//! Two primitives reduce any netlist to one scattering matrix:
//!
//! * [`innerconnect`] joins ports `k` and `l` of a single network, removing
//!   both. For every surviving pair `(i, j)`
//!
//!   ```text
//!   S'_ij = S_ij + [S_il·S_kj·(1−S_lk) + S_il·S_kk·S_lj
//!                 + S_ik·S_lj·(1−S_kl) + S_ik·S_ll·S_kj] / D
//!   D     = 1 − S_kl − S_lk + S_kl·S_lk − S_kk·S_ll
//!   ```
//!
//! * [`compose`] places two networks block-diagonally so that a port of each
//!   can then be joined with `innerconnect` ([`connect`]).
//!
//! Each frequency slice is processed on its own.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Model, PinRef, Subcircuit};
use crate::error::{Error, Result};
use crate::models::CompactModel;
use crate::smatrix::{FrequencyGrid, PortLabel, SMatrix};

/// Connections whose denominator magnitude falls to this level are rejected.
pub const SINGULARITY_EPS: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
fn denominator(skk: Complex64, skl: Complex64, slk: Complex64, sll: Complex64) -> Complex64 {
    ONE - skl - slk + skl * slk - skk * sll
}

/// Index of the first frequency at which the connection is singular, with |D|.
type Singular = (usize, f64);

/// Joins ports `k` and `l` of an `n`-port stored row-major per frequency.
/// Survivors keep their relative order.
fn innerconnect_raw(data: &[Complex64], n: usize, k: usize, l: usize) -> Result<Vec<Complex64>, Singular> {
    let nn = n * n;
    let m = n - 2;
    let keep: Vec<usize> = (0..n).filter(|&p| p != k && p != l).collect();
    let n_freq = data.len().checked_div(nn).unwrap_or(0);
    let mut out = Vec::with_capacity(n_freq * m * m);
    let mut u = vec![Complex64::default(); m];
    let mut v = vec![Complex64::default(); m];
    for f in 0..n_freq {
        let s = &data[f * nn..(f + 1) * nn];
        let at = |i: usize, j: usize| s[i * n + j];
        let (skk, skl, slk, sll) = (at(k, k), at(k, l), at(l, k), at(l, l));
        let d = denominator(skk, skl, slk, sll);
        if !(d.norm() > SINGULARITY_EPS) {
            return Err((f, d.norm()));
        }
        let inv_d = d.inv();
        let (one_lk, one_kl) = (ONE - slk, ONE - skl);
        for (q, &j) in keep.iter().enumerate() {
            let (skj, slj) = (at(k, j), at(l, j));
            u[q] = (skj * one_lk + skk * slj) * inv_d;
            v[q] = (slj * one_kl + sll * skj) * inv_d;
        }
        for &i in &keep {
            let (sil, sik) = (at(i, l), at(i, k));
            out.extend(keep.iter().enumerate().map(|(q, &j)| at(i, j) + sil * u[q] + sik * v[q]));
        }
    }
    Ok(out)
}

fn compose_raw(a: &[Complex64], na: usize, b: &[Complex64], nb: usize, n_freq: usize) -> Vec<Complex64> {
    let n = na + nb;
    let mut out = vec![Complex64::default(); n_freq * n * n];
    for f in 0..n_freq {
        let dst = &mut out[f * n * n..(f + 1) * n * n];
        for i in 0..na {
            dst[i * n..i * n + na].copy_from_slice(&a[(f * na + i) * na..(f * na + i + 1) * na]);
        }
        for i in 0..nb {
            let row = (na + i) * n + na;
            dst[row..row + nb].copy_from_slice(&b[(f * nb + i) * nb..(f * nb + i + 1) * nb]);
        }
    }
    out
}

fn check_index(index: usize, n_ports: usize) -> Result<()> {
    if index < n_ports {
        Ok(())
    } else {
        Err(Error::Index { index, n_ports })
    }
}

fn singular(grid: &FrequencyGrid, (f, d): Singular, connection: Option<String>) -> Error {
    Error::SingularConnection { connection, freq_hz: grid.points()[f], denominator: d }
}

/// Connects ports `k` and `l` of `s`, returning an `(N−2)`-port network.
pub fn innerconnect(s: &SMatrix, k: usize, l: usize) -> Result<SMatrix> {
    let n = s.n_ports();
    check_index(k, n)?;
    check_index(l, n)?;
    if k == l {
        return Err(Error::Index { index: l, n_ports: n });
    }
    let data = innerconnect_raw(s.data(), n, k, l).map_err(|e| singular(s.grid(), e, None))?;
    let ports = s.ports().iter().enumerate().filter(|(p, _)| *p != k && *p != l).map(|(_, p)| p.clone()).collect();
    Ok(SMatrix::from_parts_unchecked(s.grid().clone(), ports, data))
}

/// Block-diagonal union: ports of `a` followed by ports of `b`.
///
/// A label of `b` that is already taken gets `_` appended until it is unique.
pub fn compose(a: &SMatrix, b: &SMatrix) -> Result<SMatrix> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let data = compose_raw(a.data(), a.n_ports(), b.data(), b.n_ports(), a.n_freq());
    let mut taken: HashSet<String> = a.ports().iter().map(|p| p.as_str().to_string()).collect();
    let mut ports: Vec<PortLabel> = a.ports().to_vec();
    for p in b.ports() {
        let mut name = p.as_str().to_string();
        while taken.contains(&name) {
            name.push('_');
        }
        taken.insert(name.clone());
        ports.push(PortLabel::new(name)?);
    }
    SMatrix::new(a.grid().clone(), ports, data)
}

/// Joins port `pa` of `a` to port `pb` of `b`.
pub fn connect(a: &SMatrix, pa: usize, b: &SMatrix, pb: usize) -> Result<SMatrix> {
    check_index(pa, a.n_ports())?;
    check_index(pb, b.n_ports())?;
    let joined = compose(a, b)?;
    innerconnect(&joined, pa, a.n_ports() + pb)
}

/// Waves entering ports `k` and `l` once they are joined, for excitation
/// `a_ext` on the surviving ports (in survivor order) at frequency index `f`.
///
/// Returns `(A_k⁺, A_l⁺)`.
pub fn internal_amplitudes(
    s: &SMatrix,
    k: usize,
    l: usize,
    a_ext: &[Complex64],
    f: usize,
) -> Result<(Complex64, Complex64)> {
    let n = s.n_ports();
    check_index(k, n)?;
    check_index(l, n)?;
    if k == l {
        return Err(Error::Index { index: l, n_ports: n });
    }
    if a_ext.len() != n - 2 {
        return Err(Error::ArityMismatch { expected: n - 2, got: a_ext.len() });
    }
    if f >= s.n_freq() {
        return Err(Error::Index { index: f, n_ports: s.n_freq() });
    }
    let at = |i: usize, j: usize| s.get(f, i, j);
    let (skk, skl, slk, sll) = (at(k, k), at(k, l), at(l, k), at(l, l));
    let d = denominator(skk, skl, slk, sll);
    if !(d.norm() > SINGULARITY_EPS) {
        return Err(singular(s.grid(), (f, d.norm()), None));
    }
    let keep = (0..n).filter(|&p| p != k && p != l);
    let (mut xk, mut xl) = (Complex64::default(), Complex64::default());
    for (i, a) in keep.zip(a_ext) {
        xk += at(k, i) * a;
        xl += at(l, i) * a;
    }
    let a_l = ((ONE - slk) * xk + skk * xl) / d;
    let a_k = ((ONE - skl) * xl + sll * xk) / d;
    Ok((a_k, a_l))
}

/// Result of reducing a circuit: ports are the external pins.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub s: SMatrix,
    pub pin_map: BTreeMap<String, usize>,
}

struct Partial {
    pins: Vec<PinRef>,
    data: Vec<Complex64>,
}

/// Evaluates each distinct model once.
pub(crate) fn evaluate_instances(flat: &Subcircuit, grid: &FrequencyGrid) -> Result<Vec<SMatrix>> {
    let mut cache: HashMap<*const CompactModel, SMatrix> = HashMap::new();
    let mut out = Vec::with_capacity(flat.instances().len());
    for inst in flat.instances() {
        let model = match inst.model() {
            Model::Compact(m) => m,
            Model::Subcircuit(_) => {
                return Err(Error::Shape(format!("instance {} is a subcircuit; flatten first", inst.name())))
            }
        };
        let key = std::sync::Arc::as_ptr(model);
        let s = match cache.get(&key) {
            Some(s) => s.clone(),
            None => {
                let s = model.evaluate(grid).map_err(|e| Error::Instance {
                    instance: inst.name().to_string(),
                    source: Box::new(e),
                })?;
                cache.insert(key, s.clone());
                s
            }
        };
        out.push(s);
    }
    Ok(out)
}

/// Reduces a flat circuit to one scattering matrix over `grid`.
///
/// Connections are folded in list order: joining two pins of the same
/// partial network is an innerconnect, joining two partial networks is a
/// compose followed by an innerconnect. Disconnected pieces left at the end
/// are composed, and the ports are ordered like
/// [`Subcircuit::external_pins`].
pub fn reduce_circuit(flat: &Subcircuit, grid: &FrequencyGrid) -> Result<Reduced> {
    let evaluated = evaluate_instances(flat, grid)?;
    let n_freq = grid.len();

    let mut nets: Vec<Option<Partial>> = Vec::with_capacity(evaluated.len());
    // owner[instance][pin] = (net, position)
    let mut owner: Vec<Vec<(usize, usize)>> = Vec::with_capacity(evaluated.len());
    for (i, s) in evaluated.into_iter().enumerate() {
        let n = s.n_ports();
        owner.push((0..n).map(|p| (i, p)).collect());
        nets.push(Some(Partial { pins: (0..n).map(|p| PinRef { instance: i, pin: p }).collect(), data: s.into_data() }));
    }

    for c in flat.connections() {
        let (na, ia) = owner[c.a.instance][c.a.pin];
        let (nb, ib) = owner[c.b.instance][c.b.pin];
        let describe = || Some(flat.describe_connection(c));
        let merged = if na == nb {
            let net = nets[na].take().expect("live network");
            let data = innerconnect_raw(&net.data, net.pins.len(), ia, ib).map_err(|e| singular(grid, e, describe()))?;
            let pins = net.pins.into_iter().enumerate().filter(|(p, _)| *p != ia && *p != ib).map(|(_, p)| p).collect();
            Partial { pins, data }
        } else {
            let a = nets[na].take().expect("live network");
            let b = nets[nb].take().expect("live network");
            let (la, lb) = (a.pins.len(), b.pins.len());
            let joined = compose_raw(&a.data, la, &b.data, lb, n_freq);
            let data = innerconnect_raw(&joined, la + lb, ia, la + ib).map_err(|e| singular(grid, e, describe()))?;
            let pins = a
                .pins
                .into_iter()
                .chain(b.pins)
                .enumerate()
                .filter(|(p, _)| *p != ia && *p != la + ib)
                .map(|(_, p)| p)
                .collect();
            Partial { pins, data }
        };
        for (pos, pin) in merged.pins.iter().enumerate() {
            owner[pin.instance][pin.pin] = (na, pos);
        }
        nets[na] = Some(merged);
    }

    // Compose whatever is left into one network.
    let mut pins: Vec<PinRef> = Vec::new();
    let mut data: Vec<Complex64> = Vec::new();
    for net in nets.into_iter().flatten() {
        if net.pins.is_empty() {
            continue;
        }
        if pins.is_empty() {
            pins = net.pins;
            data = net.data;
        } else {
            data = compose_raw(&data, pins.len(), &net.data, net.pins.len(), n_freq);
            pins.extend(net.pins);
        }
    }

    let external = flat.external_pins();
    let position: HashMap<PinRef, usize> = pins.iter().enumerate().map(|(k, p)| (*p, k)).collect();
    let order: Vec<usize> = external.iter().map(|e| position[&e.pin]).collect();
    let mut fold_labels: Vec<Option<PortLabel>> = vec![None; pins.len()];
    for (e, &o) in external.iter().zip(&order) {
        fold_labels[o] = Some(PortLabel::new(e.name.clone())?);
    }
    let fold_labels = fold_labels.into_iter().map(|l| l.expect("every pin is external")).collect();
    let s = SMatrix::new(grid.clone(), fold_labels, data)?.permute(&order)?;
    let pin_map = external.into_iter().enumerate().map(|(k, e)| (e.name, k)).collect();
    Ok(Reduced { s, pin_map })
}

/// Same result as [`reduce_circuit`], with the frequency axis split across
/// the rayon thread pool. The output is bitwise identical for any split.
pub fn reduce_circuit_parallel(flat: &Subcircuit, grid: &FrequencyGrid) -> Result<Reduced> {
    let n = grid.len();
    let workers = rayon::current_num_threads().max(1);
    let chunk = n.div_ceil(workers).max(16);
    if chunk >= n {
        return reduce_circuit(flat, grid);
    }
    let ranges: Vec<(usize, usize)> = (0..n).step_by(chunk).map(|s| (s, (s + chunk).min(n))).collect();
    reduce_chunks(flat, grid, &ranges)
}

/// Reduces each `[start, end)` frequency range independently and stitches the results.
pub fn reduce_chunks(flat: &Subcircuit, grid: &FrequencyGrid, ranges: &[(usize, usize)]) -> Result<Reduced> {
    let parts: Vec<Result<Reduced>> =
        ranges.par_iter().map(|&(s, e)| reduce_circuit(flat, &grid.subgrid(s, e))).collect();
    let mut data = Vec::new();
    let mut head: Option<Reduced> = None;
    for part in parts {
        let part = part?;
        if head.is_none() {
            head = Some(Reduced { s: part.s.clone(), pin_map: part.pin_map.clone() });
        }
        data.extend_from_slice(part.s.data());
    }
    let head = head.ok_or_else(|| Error::InvalidGrid("no frequency ranges".into()))?;
    let s = SMatrix::new(grid.clone(), head.s.ports().to_vec(), data)?;
    Ok(Reduced { s, pin_map: head.pin_map })
}
