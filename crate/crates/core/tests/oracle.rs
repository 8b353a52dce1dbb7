use picsim_core::reference::{green_machine, mzi, mzi_chain, ring_filter, GreenMachineOptions, MziOptions, RingOptions};
use picsim_core::{
    direct_solve, direct_solve_matrix, parse, reduce_circuit, Complex64, Error, FrequencyGrid, Subcircuit, SweepSpec,
};

fn band(n: usize) -> FrequencyGrid {
    SweepSpec::wavelength(1.5e-6, 1.6e-6, n).unwrap().grid().unwrap()
}

fn agree(c: &Subcircuit, tol: f64) {
    let flat = c.flatten().unwrap();
    let grid = band(64);
    let a = reduce_circuit(&flat, &grid).unwrap();
    let b = direct_solve_matrix(&flat, &grid).unwrap();
    let d = a.s.max_abs_diff(&b).unwrap();
    assert!(d < tol, "{}: {d:e}", c.name());
    assert_eq!(a.s.ports(), b.ports());
}

#[test]
fn golden_circuits_match_the_direct_solve() {
    agree(&mzi(&MziOptions::default()).unwrap(), 1e-12);
    agree(&mzi_chain(6, &MziOptions::default(), 10e-6).unwrap(), 1e-12);
    agree(&green_machine(&GreenMachineOptions { crosstalk: 0.05, coupling: 0.45, ..Default::default() }).unwrap(), 1e-12);
    let rings = [10e-6, 11e-6, 12e-6].map(|r| RingOptions::new(r, 0.2));
    agree(&ring_filter(&rings, 20e-6).unwrap(), 1e-10);
}

#[test]
fn field_vectors_expose_internal_amplitudes() {
    let c = mzi(&MziOptions::default()).unwrap();
    let grid = band(5);
    let fields = direct_solve(&c, &grid, "input.input").unwrap();
    let reduced = reduce_circuit(&c, &grid).unwrap();
    for (f, v) in fields.iter().enumerate() {
        let out = v.outgoing("output.output").unwrap();
        let s = reduced.s.get(f, reduced.pin_map["output.output"], reduced.pin_map["input.input"]);
        assert!((out - s).norm() < 1e-14);
        assert_eq!(v.incident("input.input").unwrap(), Complex64::new(1.0, 0.0));
        // Each connected port receives exactly what its partner emits.
        for (a, b) in [("splitter.in1", "input.n1"), ("wg_long.n1", "splitter.out1"), ("output.n1", "recombiner.out1")] {
            assert!((v.incident(a).unwrap() - v.outgoing(b).unwrap()).norm() < 1e-15);
        }
        // Splitting is even: each arm sees half the stem power.
        let stem = v.incident("splitter.in1").unwrap().norm_sqr();
        assert!((v.outgoing("splitter.out1").unwrap().norm_sqr() - stem / 2.0).abs() < 1e-15);
    }
    assert!(direct_solve(&c, &grid, "nope").is_err());
}

#[test]
fn singular_loop_is_reported_by_both_solvers() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../netlists/singular_loop.phc")).unwrap();
    let (c, sweep) = parse(&text).unwrap();
    let grid = sweep.unwrap().grid().unwrap();
    match reduce_circuit(&c, &grid).unwrap_err() {
        Error::SingularConnection { connection, .. } => assert_eq!(connection.as_deref(), Some("b.n2 <-> a.n1")),
        e => panic!("{e}"),
    }
    assert!(matches!(direct_solve_matrix(&c, &grid), Err(Error::SingularSystem { .. })));
}

#[test]
fn disconnected_pieces_are_composed() {
    let (c, _) = parse("comp a y_branch\ncomp b terminator").unwrap();
    let grid = band(3);
    let r = reduce_circuit(&c, &grid).unwrap();
    assert_eq!(r.s.n_ports(), 4);
    assert_eq!(r.s.get(0, 3, 3), Complex64::new(0.0, 0.0));
    assert!(r.s.max_abs_diff(&direct_solve_matrix(&c, &grid).unwrap()).unwrap() < 1e-15);
}
