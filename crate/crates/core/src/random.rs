//! Seeded random circuits for oracle and property testing.
//!
//! A [`Recipe`] lists instances and connections by name so the same circuit
//! can be rebuilt with its instances or connections in a different order.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::Subcircuit;
use crate::error::Result;
use crate::models::{CompactModel, GratingParams, HalfRingParams, WaveguideParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomOptions {
    pub min_components: usize,
    pub max_components: usize,
    pub max_loops: usize,
    /// Only directional couplers, crossovers and zero-loss waveguides.
    pub lossless: bool,
}

impl Default for RandomOptions {
    fn default() -> Self {
        Self { min_components: 2, max_components: 8, max_loops: 2, lossless: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub instances: Vec<(String, CompactModel)>,
    /// `(instance_a, pin_a, instance_b, pin_b)`
    pub connections: Vec<(String, String, String, String)>,
}

impl Recipe {
    pub fn build(&self) -> Result<Subcircuit> {
        let mut c = Subcircuit::new("random");
        c.add(self.instances.iter().map(|(n, m)| (m.clone(), n.clone())))?;
        c.connect_many(&self.connections)?;
        Ok(c)
    }

    /// Same circuit with connections listed in a different order.
    pub fn shuffled_connections(&self, rng: &mut impl Rng) -> Recipe {
        let mut r = self.clone();
        r.connections.shuffle(rng);
        r
    }

    /// Same circuit with instances listed in a different order.
    pub fn shuffled_instances(&self, rng: &mut impl Rng) -> Recipe {
        let mut r = self.clone();
        r.instances.shuffle(rng);
        r
    }
}

pub fn random_waveguide(rng: &mut impl Rng, lossless: bool) -> WaveguideParams {
    WaveguideParams {
        length: rng.gen_range(0.0..200e-6),
        n0: rng.gen_range(2.3..2.6),
        dn_dlambda: rng.gen_range(-1.5e6..-0.8e6),
        d2n_dlambda2: rng.gen_range(-1e11..1e11),
        loss: if lossless { 0.0 } else { rng.gen_range(0.0..1000.0) },
        lambda0: rng.gen_range(1.53e-6..1.57e-6),
    }
}

pub fn random_model(rng: &mut impl Rng, lossless: bool) -> CompactModel {
    let choice = if lossless { [0, 2, 5][rng.gen_range(0..3)] } else { rng.gen_range(0..7) };
    let model = match choice {
        0 => CompactModel::waveguide(random_waveguide(rng, lossless)),
        1 => Ok(CompactModel::y_branch()),
        2 => CompactModel::directional_coupler(rng.gen_range(0.05..0.95)),
        3 => CompactModel::grating_coupler(GratingParams {
            center_wavelength: rng.gen_range(1.5e-6..1.6e-6),
            peak_loss: rng.gen_range(0.0..6.0),
            bandwidth_1db: rng.gen_range(20e-9..60e-9),
        }),
        4 => CompactModel::half_ring(HalfRingParams {
            radius: rng.gen_range(2e-6..30e-6),
            coupling: rng.gen_range(0.05..0.95),
            waveguide: random_waveguide(rng, false),
        }),
        5 => CompactModel::crossover(rng.gen_range(0.0..0.2)),
        _ => Ok(CompactModel::terminator()),
    };
    model.expect("random parameters lie inside the valid ranges")
}

/// A random spanning forest over 2..=8 components plus up to `max_loops`
/// extra loop-forming connections. At least one pin stays external.
pub fn random_recipe(rng: &mut impl Rng, opts: &RandomOptions) -> Recipe {
    let count = rng.gen_range(opts.min_components..=opts.max_components);
    let instances: Vec<(String, CompactModel)> =
        (0..count).map(|i| (format!("c{i}"), random_model(rng, opts.lossless))).collect();
    let mut free: Vec<Vec<String>> =
        instances.iter().map(|(_, m)| m.ports().iter().map(|p| p.to_string()).collect()).collect();
    let mut connections = Vec::new();

    let take = |free: &mut Vec<Vec<String>>, inst: usize, rng: &mut dyn rand::RngCore| {
        let k = rng.gen_range(0..free[inst].len());
        free[inst].swap_remove(k)
    };

    for i in 1..count {
        if free[i].is_empty() {
            continue;
        }
        let candidates: Vec<usize> = (0..i).filter(|&j| !free[j].is_empty()).collect();
        let Some(&j) = candidates.choose(rng) else { continue };
        let pa = take(&mut free, i, rng);
        let pb = take(&mut free, j, rng);
        connections.push((instances[i].0.clone(), pa, instances[j].0.clone(), pb));
    }

    if free.iter().all(Vec::is_empty) {
        // Every pin got used up by the tree; release the last connection.
        let (a, pa, b, pb) = connections.pop().expect("a closed circuit has connections");
        let index = |name: &str| instances.iter().position(|(n, _)| n == name).unwrap();
        free[index(&a)].push(pa);
        free[index(&b)].push(pb);
    }

    let loops = rng.gen_range(0..=opts.max_loops);
    for _ in 0..loops {
        let total: usize = free.iter().map(Vec::len).sum();
        if total < 3 {
            break;
        }
        let slots: Vec<usize> = free.iter().enumerate().flat_map(|(i, f)| std::iter::repeat_n(i, f.len())).collect();
        let a = *slots.choose(rng).unwrap();
        let pa = take(&mut free, a, rng);
        let slots: Vec<usize> = free.iter().enumerate().flat_map(|(i, f)| std::iter::repeat_n(i, f.len())).collect();
        let b = *slots.choose(rng).unwrap();
        let pb = take(&mut free, b, rng);
        connections.push((instances[a].0.clone(), pa, instances[b].0.clone(), pb));
    }
    Recipe { instances, connections }
}
