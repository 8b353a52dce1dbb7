//! The `.phc` text netlist format.
//!
//! One statement per line, `#` starts a comment, tokens are whitespace
//! separated and numbers are plain SI values:
//!
//! ```text
//! model <name> <kind> [key=value ...]
//! comp <instance> <model or builtin kind>
//! connect <inst>.<pin> <inst>.<pin>
//! port <inst>.<pin> as <alias>
//! sweep <start_m> <stop_m> <n_points>
//! ```
//!
//! The format is flat. [`emit`] flattens hierarchy and keeps the dotted
//! instance names, so endpoints are split at the last `.`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::circuit::{Model, Subcircuit};
use crate::error::{Error, Result};
use crate::models::{load_sparam_file, CompactModel, ModelKind};
use crate::simulate::{SweepMode, SweepSpec};

const BUILTIN_KINDS: [&str; 7] =
    ["waveguide", "y_branch", "directional_coupler", "grating_coupler", "half_ring", "crossover", "terminator"];

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Model { name: String, kind: String, params: Vec<(String, String)> },
    Comp { instance: String, model: String },
    Connect { a: (String, String), b: (String, String) },
    Port { endpoint: (String, String), alias: String },
    Sweep { start: f64, stop: f64, n_points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    /// 1-based source line.
    pub line: usize,
    pub directive: Directive,
}

/// Statements of a netlist in source order, before any circuit is built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetlistDocument {
    pub statements: Vec<Statement>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn endpoint(line: usize, tok: &str) -> Result<(String, String)> {
    match tok.rsplit_once('.') {
        Some((inst, pin)) if !inst.is_empty() && !pin.is_empty() => Ok((inst.to_string(), pin.to_string())),
        _ => Err(perr(line, format!("expected <instance>.<pin>, found {tok:?}"))),
    }
}

fn number<T: std::str::FromStr>(line: usize, what: &str, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("bad {what} {tok:?}")))
}

fn arity(line: usize, directive: &str, expected: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(perr(line, format!("{directive} expects {expected}")))
    }
}

impl NetlistDocument {
    /// Tokenizes `text` into statements. Checks syntax only.
    pub fn parse(text: &str) -> Result<Self> {
        let mut statements = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split_once('#').map_or(raw, |(b, _)| b);
            let toks: Vec<&str> = body.split_whitespace().collect();
            let Some((&head, args)) = toks.split_first() else { continue };
            let directive = match head {
                "model" => {
                    arity(line, "model", "<name> <kind> [key=value ...]", args.len() >= 2)?;
                    let params = args[2..]
                        .iter()
                        .map(|t| match t.split_once('=') {
                            Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
                            _ => Err(perr(line, format!("expected key=value, found {t:?}"))),
                        })
                        .collect::<Result<_>>()?;
                    Directive::Model { name: args[0].to_string(), kind: args[1].to_string(), params }
                }
                "comp" => {
                    arity(line, "comp", "<instance> <model>", args.len() == 2)?;
                    Directive::Comp { instance: args[0].to_string(), model: args[1].to_string() }
                }
                "connect" => {
                    arity(line, "connect", "two endpoints", args.len() == 2)?;
                    Directive::Connect { a: endpoint(line, args[0])?, b: endpoint(line, args[1])? }
                }
                "port" => {
                    arity(line, "port", "<inst>.<pin> as <alias>", args.len() == 3 && args[1] == "as")?;
                    Directive::Port { endpoint: endpoint(line, args[0])?, alias: args[2].to_string() }
                }
                "sweep" => {
                    arity(line, "sweep", "<start_m> <stop_m> <n_points>", args.len() == 3)?;
                    Directive::Sweep {
                        start: number(line, "start wavelength", args[0])?,
                        stop: number(line, "stop wavelength", args[1])?,
                        n_points: number(line, "point count", args[2])?,
                    }
                }
                other => return Err(perr(line, format!("unknown directive {other:?}"))),
            };
            statements.push(Statement { line, directive });
        }
        Ok(Self { statements })
    }

    /// Builds the circuit. Relative `sparam_file` paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<(Subcircuit, Option<SweepSpec>)> {
        let mut circuit = Subcircuit::new("netlist");
        let mut models: HashMap<&str, Arc<CompactModel>> = HashMap::new();
        let mut builtins: HashMap<&str, Arc<CompactModel>> = HashMap::new();
        let mut sweep = None;
        for st in &self.statements {
            let line = st.line;
            let at = |e: Error| match e {
                Error::Parse { .. } => e,
                other => perr(line, other.to_string()),
            };
            match &st.directive {
                Directive::Model { name, kind, params } => {
                    if models.contains_key(name.as_str()) {
                        return Err(perr(line, format!("duplicate model name {name:?}")));
                    }
                    let model = build_model(kind, params, base).map_err(at)?;
                    models.insert(name, Arc::new(model));
                }
                Directive::Comp { instance, model } => {
                    let m = match models.get(model.as_str()) {
                        Some(m) => m.clone(),
                        None if BUILTIN_KINDS.contains(&model.as_str()) => match builtins.get(model.as_str()) {
                            Some(m) => m.clone(),
                            None => {
                                let m = Arc::new(CompactModel::from_params(model, &[]).map_err(at)?);
                                builtins.insert(model, m.clone());
                                m
                            }
                        },
                        None => return Err(perr(line, format!("unknown model {model:?}"))),
                    };
                    circuit.add_one(m, instance.as_str()).map_err(at)?;
                }
                Directive::Connect { a, b } => {
                    circuit.connect(&a.0, &a.1, &b.0, &b.1).map_err(at)?;
                }
                Directive::Port { endpoint, alias } => {
                    circuit.set_port_alias(&endpoint.0, &endpoint.1, alias).map_err(at)?;
                }
                Directive::Sweep { start, stop, n_points } => {
                    if sweep.is_some() {
                        return Err(perr(line, "more than one sweep line"));
                    }
                    sweep = Some(SweepSpec::wavelength(*start, *stop, *n_points).map_err(at)?);
                }
            }
        }
        Ok((circuit, sweep))
    }
}

fn build_model(kind: &str, params: &[(String, String)], base: Option<&Path>) -> Result<CompactModel> {
    if kind == "sparam_file" {
        let [(key, value)] = params else {
            return Err(Error::Param {
                name: "path".into(),
                value: f64::NAN,
                reason: "sparam_file takes exactly one parameter, path=<file>".into(),
            });
        };
        if key != "path" {
            return Err(Error::Param { name: key.clone(), value: f64::NAN, reason: "not a sparam_file parameter".into() });
        }
        let path = PathBuf::from(value);
        let full = match base {
            Some(b) if path.is_relative() => b.join(&path),
            _ => path.clone(),
        };
        let loaded = load_sparam_file(&full)?;
        let ModelKind::File { data, .. } = loaded.kind() else { unreachable!() };
        return Ok(CompactModel::from_smatrix(data.clone(), Some(path)));
    }
    if !BUILTIN_KINDS.contains(&kind) {
        return Err(Error::Param { name: kind.to_string(), value: f64::NAN, reason: "unknown model kind".into() });
    }
    let numeric = params
        .iter()
        .map(|(k, v)| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok((k.clone(), x)),
            _ => Err(Error::Param { name: k.clone(), value: f64::NAN, reason: format!("{v:?} is not a finite number") }),
        })
        .collect::<Result<Vec<_>>>()?;
    CompactModel::from_params(kind, &numeric)
}

/// Parses netlist text into a circuit and the optional sweep line.
pub fn parse(text: &str) -> Result<(Subcircuit, Option<SweepSpec>)> {
    parse_with_base(text, None)
}

pub fn parse_with_base(text: &str, base: Option<&Path>) -> Result<(Subcircuit, Option<SweepSpec>)> {
    NetlistDocument::parse(text)?.build(base)
}

/// Reads and parses a `.phc` file; `sparam_file` paths are relative to it.
pub fn parse_file(path: impl AsRef<Path>) -> Result<(Subcircuit, Option<SweepSpec>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_with_base(&text, path.parent())
}

/// Writes `circuit` as a flat netlist.
///
/// Models are shared the same way as in `circuit`. Pins are written under
/// their model's default names; renamed external pins become `port` aliases.
pub fn emit(circuit: &Subcircuit) -> Result<String> {
    emit_with_sweep(circuit, None)
}

pub fn emit_with_sweep(circuit: &Subcircuit, sweep: Option<&SweepSpec>) -> Result<String> {
    let flat = circuit.flatten()?;
    let mut out = String::from("# picsim netlist\n");
    let mut ids: HashMap<*const CompactModel, String> = HashMap::new();
    let mut comps = String::new();
    for inst in flat.instances() {
        let Model::Compact(m) = inst.model() else { unreachable!("flatten leaves only compact models") };
        let next = ids.len();
        let id = match ids.get(&Arc::as_ptr(m)) {
            Some(id) => id.clone(),
            None => {
                let id = format!("m{next}");
                write!(out, "model {id} {}", m.kind_name()).unwrap();
                if let Some(path) = m.file_path() {
                    let p = path.to_str().filter(|p| !p.is_empty() && !p.contains(char::is_whitespace));
                    let p = p.ok_or_else(|| Error::Io(format!("cannot write sparam path {}", path.display())))?;
                    write!(out, " path={p}").unwrap();
                } else if matches!(m.kind(), ModelKind::File { .. }) {
                    return Err(Error::Io(format!("instance {} uses in-memory S-parameters with no file", inst.name())));
                }
                for (k, v) in m.params() {
                    write!(out, " {k}={v:e}").unwrap();
                }
                out.push('\n');
                ids.insert(Arc::as_ptr(m), id.clone());
                id
            }
        };
        writeln!(comps, "comp {} {id}", inst.name()).unwrap();
    }
    out.push_str(&comps);
    let default_name = |p: crate::circuit::PinRef| {
        let inst = &flat.instances()[p.instance];
        format!("{}.{}", inst.name(), inst.model().ports()[p.pin])
    };
    for c in flat.connections() {
        writeln!(out, "connect {} {}", default_name(c.a), default_name(c.b)).unwrap();
    }
    for ext in flat.external_pins() {
        let d = default_name(ext.pin);
        if ext.name != d {
            writeln!(out, "port {d} as {}", ext.name).unwrap();
        }
    }
    if let Some(s) = sweep {
        if s.mode != SweepMode::Wavelength {
            return Err(Error::Sweep("netlists only record wavelength sweeps".into()));
        }
        writeln!(out, "sweep {:e} {:e} {}", s.start, s.stop, s.n_points).unwrap();
    }
    Ok(out)
}
