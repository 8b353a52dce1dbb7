//! Linear photonic circuit simulation by sub-network growth.
//!
//! Components are frequency-dependent scattering matrices. A circuit is a
//! list of instances and pin-to-pin connections; [`cascade::reduce_circuit`]
//! folds the connections one at a time into a single matrix whose ports are
//! the circuit's unconnected pins.
//!
//! ```
//! use picsim_core::{reference, run_sweep, SweepSpec};
//!
//! let mzi = reference::mzi(&Default::default()).unwrap();
//! let spec = SweepSpec::wavelength(1.5e-6, 1.6e-6, 200).unwrap();
//! let result = run_sweep(&mzi, &spec).unwrap();
//! let (_, power) = result.power("input.input", "output.output").unwrap();
//! assert!(power.iter().all(|&p| p <= 1.0));
//! ```

// `!(x > eps)` is used on purpose so that NaN lands on the failing side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchmark;
pub mod cascade;
pub mod circuit;
pub mod error;
pub mod models;
pub mod parser;
pub mod random;
pub mod reference;
pub mod simulate;
pub mod smatrix;

pub use num_complex::Complex64;

pub use cascade::{compose, connect, innerconnect, internal_amplitudes, reduce_circuit, reduce_circuit_parallel, Reduced};
pub use circuit::{ComponentInstance, Connection, ExternalPin, Model, PinRef, Subcircuit};
pub use error::{Error, Result};
pub use models::{CompactModel, GratingParams, HalfRingParams, ModelKind, WaveguideParams};
pub use parser::{emit, parse, parse_file};
pub use simulate::{direct_solve, direct_solve_matrix, run_sweep, simulate_grid, SweepMode, SweepResult, SweepSpec};
pub use smatrix::{frequency_to_wavelength, wavelength_to_frequency, FrequencyGrid, PortLabel, SMatrix, SPEED_OF_LIGHT};
