use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use picsim_core::reference::{mzi, MziOptions};
use picsim_core::{run_sweep, SweepSpec};
use serde_json::Value;

fn netlist(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../netlists").join(name)
}

fn picsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn mzi_path() -> String {
    netlist("mzi.phc").to_str().unwrap().to_string()
}

#[test]
fn csv_has_one_row_per_point() {
    let o = picsim(&["simulate", &mzi_path(), "--from", "input.n2", "--to", "output.n2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.split('\n').collect();
    assert_eq!(lines.len(), 2002, "header, 2000 rows, trailing newline");
    assert_eq!(lines[2001], "");
    assert_eq!(
        lines[0],
        "wavelength_m,frequency_Hz,input.n2->output.n2.re,input.n2->output.n2.im,\
         input.n2->output.n2.power,input.n2->output.n2.phase_rad"
    );
    assert!(!text.contains('\r'));
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let last: Vec<f64> = lines[2000].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(first[0] < last[0], "rows run in ascending wavelength");
    assert!((first[0] - 1.5e-6).abs() < 1e-18);
}

#[test]
fn csv_matches_the_library_and_is_byte_stable() {
    let args = ["simulate", &mzi_path(), "--points", "64"];
    let a = stdout(&picsim(&args));
    let b = stdout(&picsim(&args));
    assert_eq!(a, b);

    let scripted = mzi(&MziOptions::default()).unwrap();
    let r = run_sweep(&scripted, &SweepSpec::wavelength(1.5e-6, 1.6e-6, 64).unwrap()).unwrap();
    let (_, s) = r.data("input.input", "output.output").unwrap();
    for (row, line) in a.lines().skip(1).enumerate() {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let expected = s[63 - row];
        assert_eq!((v[2], v[3]), (expected.re, expected.im));
        assert_eq!(v[4], expected.norm_sqr());
    }
}

#[test]
fn json_round_trips_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mzi.json");
    let o = picsim(&["simulate", &mzi_path(), "--points", "32", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["pins"], serde_json::json!(["input.n2", "output.n2"]));
    assert_eq!(doc["wavelength_m"].as_array().unwrap().len(), 32);
    assert_eq!(doc["frequency_Hz"].as_array().unwrap().len(), 32);
    let trace = &doc["traces"][0];
    assert_eq!(trace["from"], "input.n2");
    assert_eq!(trace["to"], "output.n2");

    let csv = stdout(&picsim(&["simulate", &mzi_path(), "--points", "32"]));
    for (k, line) in csv.lines().skip(1).enumerate() {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(doc["wavelength_m"][k].as_f64().unwrap(), v[0]);
        assert_eq!(trace["re"][k].as_f64().unwrap(), v[2]);
        assert_eq!(trace["im"][k].as_f64().unwrap(), v[3]);
        assert_eq!(trace["power"][k].as_f64().unwrap(), v[4]);
        assert_eq!(trace["phase_rad"][k].as_f64().unwrap(), v[5]);
    }
}

#[test]
fn sweep_flags_override_the_netlist() {
    let o = picsim(&["simulate", &mzi_path(), "--start", "1.54e-6", "--stop", "1.56e-6", "--points", "3"]);
    let text = stdout(&o);
    let wl: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(wl.len(), 3);
    assert!((wl[0] - 1.54e-6).abs() < 1e-18 && (wl[2] - 1.56e-6).abs() < 1e-18);
}

#[test]
fn pin_pair_selection() {
    let ring = netlist("add_drop.phc");
    let ring = ring.to_str().unwrap();
    let o = picsim(&["simulate", ring, "--all-pairs", "--points", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 2 + 16 * 4);
    assert!(header.contains("input->drop.re"));

    let o = picsim(&["simulate", ring, "--from", "input", "--to", "drop", "--from", "input", "--to", "through", "--points", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("wavelength_m,frequency_Hz,input->drop.re"));

    // More than two pins and no --to: nothing sensible to default to.
    let o = picsim(&["simulate", ring, "--from", "input"]);
    assert_eq!(o.status.code(), Some(64));
    let o = picsim(&["simulate", ring]);
    assert_eq!(o.status.code(), Some(64));
    let o = picsim(&["simulate", ring, "--from", "input", "--to", "drop", "--from", "add"]);
    assert_eq!(o.status.code(), Some(64));
    let o = picsim(&["simulate", ring, "--from", "input", "--to", "nowhere"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("nowhere"));

    // Two pins: the missing side is the other pin.
    let o = picsim(&["simulate", &mzi_path(), "--to", "input.n2", "--points", "2"]);
    assert!(stdout(&o).contains("output.n2->input.n2.re"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.phc");
    std::fs::write(&bad, "comp a y_branch\n# fine\nconnect a.n1 a.n1\n").unwrap();
    let o = picsim(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.phc:3:"), "{}", stderr(&o));

    let o = picsim(&["simulate", dir.path().join("missing.phc").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = picsim(&["simulate", netlist("singular_loop.phc").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b.n2 <-> a.n1"), "{}", stderr(&o));

    assert_eq!(picsim(&["simulate", &mzi_path(), "--format", "xml"]).status.code(), Some(64));
    assert_eq!(picsim(&["simulate", &mzi_path(), "--points", "1"]).status.code(), Some(64));
    assert_eq!(picsim(&["simulate"]).status.code(), Some(64));
    assert_eq!(picsim(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(picsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn benchmark_prints_a_table() {
    let o = picsim(&["benchmark", "--mzi-counts", "1,4", "--repeats", "2", "--points", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[0], ["mzis", "mean_seconds", "ratio"]);
    assert_eq!(rows[1][0], "1");
    assert_eq!(rows[1][2], "1.000");
    assert_eq!(rows[2][0], "4");
    assert!(rows[2][1].parse::<f64>().unwrap() > 0.0);

    assert_eq!(picsim(&["benchmark", "--repeats", "0"]).status.code(), Some(64));
    assert_eq!(picsim(&["benchmark", "--mzi-counts", "0"]).status.code(), Some(64));
}

#[test]
fn single_mzi_chain_equals_the_mzi_netlist() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = picsim(&["benchmark", "--mzi-counts", "1", "--repeats", "1", "--points", "40", "--save-netlists", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let chain = dir.path().join("mzi_chain_1.phc");
    let a = picsim(&["simulate", chain.to_str().unwrap(), "--format", "json"]);
    let b = picsim(&["simulate", &mzi_path(), "--points", "40", "--format", "json"]);
    let a: Value = serde_json::from_slice(&a.stdout).unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(a["pins"], serde_json::json!(["input", "output"]));
    assert_eq!(a["wavelength_m"], b["wavelength_m"]);
    for key in ["re", "im", "power", "phase_rad"] {
        assert_eq!(a["traces"][0][key], b["traces"][0][key], "{key}");
    }
}
