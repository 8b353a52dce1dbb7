//! Circuit netlists: named instances, pin renaming, point-to-point
//! connections and hierarchical subcircuits.
//!
//! Connections bind pins by position (`instance index`, `pin index`), so a
//! pin can be renamed before or after it is connected. Every pin that is not
//! part of a connection is an external port of the circuit, addressed as
//! `instance.pin` unless an alias was declared for it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::CompactModel;
use crate::smatrix::PortLabel;

/// What an instance is built from: a leaf compact model or a nested subcircuit.
#[derive(Debug, Clone)]
pub enum Model {
    Compact(Arc<CompactModel>),
    Subcircuit(Arc<Subcircuit>),
}

impl Model {
    /// Default pin names.
    pub fn ports(&self) -> Vec<PortLabel> {
        match self {
            Model::Compact(m) => m.ports().to_vec(),
            Model::Subcircuit(c) => c
                .external_pins()
                .into_iter()
                .map(|p| PortLabel::new(p.name).expect("external pin names are valid labels"))
                .collect(),
        }
    }
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Model::Compact(a), Model::Compact(b)) => Arc::ptr_eq(a, b) || a == b,
            (Model::Subcircuit(a), Model::Subcircuit(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl From<CompactModel> for Model {
    fn from(m: CompactModel) -> Self {
        Model::Compact(Arc::new(m))
    }
}

impl From<Arc<CompactModel>> for Model {
    fn from(m: Arc<CompactModel>) -> Self {
        Model::Compact(m)
    }
}

impl From<&Arc<CompactModel>> for Model {
    fn from(m: &Arc<CompactModel>) -> Self {
        Model::Compact(Arc::clone(m))
    }
}

impl From<Subcircuit> for Model {
    fn from(c: Subcircuit) -> Self {
        Model::Subcircuit(Arc::new(c))
    }
}

impl From<Arc<Subcircuit>> for Model {
    fn from(c: Arc<Subcircuit>) -> Self {
        Model::Subcircuit(c)
    }
}

impl From<&Arc<Subcircuit>> for Model {
    fn from(c: &Arc<Subcircuit>) -> Self {
        Model::Subcircuit(Arc::clone(c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentInstance {
    name: String,
    model: Model,
    pins: Vec<PortLabel>,
}

impl ComponentInstance {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn pins(&self) -> &[PortLabel] {
        &self.pins
    }

    pub fn pin_index(&self, pin: &str) -> Option<usize> {
        self.pins.iter().position(|p| p.as_str() == pin)
    }
}

/// Identity of a pin: instance index and pin position within the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PinRef {
    pub instance: usize,
    pub pin: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connection {
    pub a: PinRef,
    pub b: PinRef,
}

/// An unconnected pin together with the name it is exposed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalPin {
    pub name: String,
    pub pin: PinRef,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `ident(.ident)*`
pub fn is_hierarchical_name(s: &str) -> bool {
    s.split('.').all(is_identifier)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Subcircuit {
    name: String,
    instances: Vec<ComponentInstance>,
    index: HashMap<String, usize>,
    connections: Vec<Connection>,
    connected: HashSet<PinRef>,
    aliases: Vec<(PinRef, String)>,
}

impl Subcircuit {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[ComponentInstance] {
        &self.instances
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn instance(&self, name: &str) -> Option<&ComponentInstance> {
        self.index.get(name).map(|&i| &self.instances[i])
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_connected(&self, pin: PinRef) -> bool {
        self.connected.contains(&pin)
    }

    /// True when no instance is backed by a subcircuit.
    pub fn is_flat(&self) -> bool {
        self.instances.iter().all(|i| matches!(i.model, Model::Compact(_)))
    }

    /// Adds instances named after `entries`; the same model may back any
    /// number of instances. Returns the newly created instances.
    pub fn add<M, S>(&mut self, entries: impl IntoIterator<Item = (M, S)>) -> Result<&[ComponentInstance]>
    where
        M: Into<Model>,
        S: Into<String>,
    {
        let entries: Vec<(Model, String)> = entries.into_iter().map(|(m, s)| (m.into(), s.into())).collect();
        let mut fresh = HashSet::new();
        for (_, name) in &entries {
            if !is_hierarchical_name(name) {
                return Err(Error::InvalidLabel(name.clone()));
            }
            if self.index.contains_key(name) || !fresh.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        let start = self.instances.len();
        for (model, name) in entries {
            self.push_instance(name, model);
        }
        Ok(&self.instances[start..])
    }

    /// Adds a single instance and returns its index.
    pub fn add_one(&mut self, model: impl Into<Model>, name: impl Into<String>) -> Result<usize> {
        self.add([(model.into(), name.into())])?;
        Ok(self.instances.len() - 1)
    }

    fn push_instance(&mut self, name: String, model: Model) -> usize {
        let pins = model.ports();
        let idx = self.instances.len();
        self.index.insert(name.clone(), idx);
        self.instances.push(ComponentInstance { name, model, pins });
        idx
    }

    fn lookup(&self, instance: &str) -> Result<usize> {
        self.instance_index(instance).ok_or_else(|| Error::UnknownInstance(instance.to_string()))
    }

    /// Resolves `instance`, `pin` names to a pin identity.
    pub fn pin(&self, instance: &str, pin: &str) -> Result<PinRef> {
        let i = self.lookup(instance).map_err(|_| Error::UnknownEndpoint(format!("{instance}.{pin}")))?;
        let p = self.instances[i]
            .pin_index(pin)
            .ok_or_else(|| Error::UnknownEndpoint(format!("{instance}.{pin}")))?;
        Ok(PinRef { instance: i, pin: p })
    }

    pub fn pin_name(&self, pin: PinRef) -> String {
        let inst = &self.instances[pin.instance];
        format!("{}.{}", inst.name, inst.pins[pin.pin])
    }

    pub fn rename_pin(&mut self, instance: &str, old: &str, new: &str) -> Result<()> {
        let i = self.lookup(instance)?;
        let inst = &mut self.instances[i];
        let p = inst.pin_index(old).ok_or_else(|| Error::UnknownPin(format!("{instance}.{old}")))?;
        if !is_identifier(new) {
            return Err(Error::InvalidLabel(new.to_string()));
        }
        if inst.pins.iter().enumerate().any(|(k, q)| k != p && q.as_str() == new) {
            return Err(Error::DuplicatePin { instance: instance.to_string(), pin: new.to_string() });
        }
        inst.pins[p] = PortLabel::new(new)?;
        Ok(())
    }

    /// Renames every pin of `instance`, in default pin order.
    pub fn rename_all<S: AsRef<str>>(&mut self, instance: &str, names: &[S]) -> Result<()> {
        let i = self.lookup(instance)?;
        let inst = &mut self.instances[i];
        if names.len() != inst.pins.len() {
            return Err(Error::ArityMismatch { expected: inst.pins.len(), got: names.len() });
        }
        let mut seen = HashSet::new();
        for n in names {
            let n = n.as_ref();
            if !is_identifier(n) {
                return Err(Error::InvalidLabel(n.to_string()));
            }
            if !seen.insert(n) {
                return Err(Error::DuplicatePin { instance: instance.to_string(), pin: n.to_string() });
            }
        }
        inst.pins = names.iter().map(|n| PortLabel::new(n.as_ref())).collect::<Result<_>>()?;
        Ok(())
    }

    pub fn connect(&mut self, inst_a: &str, pin_a: &str, inst_b: &str, pin_b: &str) -> Result<()> {
        self.connect_many(&[(inst_a, pin_a, inst_b, pin_b)])
    }

    /// Records connections. The whole list is validated before any of it is applied.
    pub fn connect_many<S: AsRef<str>>(&mut self, list: &[(S, S, S, S)]) -> Result<()> {
        let mut pending = Vec::with_capacity(list.len());
        let mut claimed = HashSet::new();
        for (ia, pa, ib, pb) in list {
            let a = self.pin(ia.as_ref(), pa.as_ref())?;
            let b = self.pin(ib.as_ref(), pb.as_ref())?;
            if a == b {
                return Err(Error::SelfPin(self.pin_name(a)));
            }
            for p in [a, b] {
                if self.connected.contains(&p) || !claimed.insert(p) {
                    return Err(Error::AlreadyConnected(self.pin_name(p)));
                }
            }
            pending.push(Connection { a, b });
        }
        for c in pending {
            self.push_connection(c);
        }
        Ok(())
    }

    fn push_connection(&mut self, c: Connection) {
        self.connected.insert(c.a);
        self.connected.insert(c.b);
        self.aliases.retain(|(p, _)| *p != c.a && *p != c.b);
        self.connections.push(c);
    }

    /// Exposes an unconnected pin under `alias` instead of `instance.pin`.
    pub fn set_port_alias(&mut self, instance: &str, pin: &str, alias: &str) -> Result<()> {
        let p = self.pin(instance, pin)?;
        if self.connected.contains(&p) {
            return Err(Error::AlreadyConnected(self.pin_name(p)));
        }
        if !is_hierarchical_name(alias) {
            return Err(Error::InvalidLabel(alias.to_string()));
        }
        if self.external_pins().iter().any(|e| e.name == alias && e.pin != p) {
            return Err(Error::DuplicateName(alias.to_string()));
        }
        self.set_alias(p, alias.to_string());
        Ok(())
    }

    fn set_alias(&mut self, p: PinRef, alias: String) {
        self.aliases.retain(|(q, _)| *q != p);
        if alias != self.pin_name(p) {
            self.aliases.push((p, alias));
        }
    }

    /// Declared aliases, in declaration order.
    pub fn aliases(&self) -> &[(PinRef, String)] {
        &self.aliases
    }

    /// Unconnected pins in instance order then pin order.
    pub fn external_pins(&self) -> Vec<ExternalPin> {
        let alias: HashMap<PinRef, &str> = self.aliases.iter().map(|(p, a)| (*p, a.as_str())).collect();
        let mut out = Vec::new();
        for (i, inst) in self.instances.iter().enumerate() {
            for p in 0..inst.pins.len() {
                let pin = PinRef { instance: i, pin: p };
                if self.connected.contains(&pin) {
                    continue;
                }
                let name = alias.get(&pin).map(|a| a.to_string()).unwrap_or_else(|| self.pin_name(pin));
                out.push(ExternalPin { name, pin });
            }
        }
        out
    }

    pub fn describe_connection(&self, c: &Connection) -> String {
        format!("{} <-> {}", self.pin_name(c.a), self.pin_name(c.b))
    }

    /// Inlines nested subcircuits into one flat circuit. Nested instances
    /// are named `outer.inner`; external pin names are preserved.
    pub fn flatten(&self) -> Result<Subcircuit> {
        let mut out = Subcircuit::new(self.name.clone());
        let mut stack = vec![self.name.as_str()];
        let map = self.inline_into(&mut out, "", &mut stack)?;
        for ext in self.external_pins() {
            let flat = map[ext.pin.instance][ext.pin.pin];
            out.set_alias(flat, ext.name);
        }
        Ok(out)
    }

    /// Appends this circuit's leaves to `out`, returning where each of this
    /// circuit's pins ended up.
    fn inline_into<'a>(&'a self, out: &mut Subcircuit, prefix: &str, stack: &mut Vec<&'a str>) -> Result<Vec<Vec<PinRef>>> {
        let mut map: Vec<Vec<PinRef>> = Vec::with_capacity(self.instances.len());
        for inst in &self.instances {
            let name = format!("{prefix}{}", inst.name);
            match &inst.model {
                Model::Compact(_) => {
                    let idx = out.push_instance(name, inst.model.clone());
                    out.instances[idx].pins = inst.pins.clone();
                    map.push((0..inst.pins.len()).map(|p| PinRef { instance: idx, pin: p }).collect());
                }
                Model::Subcircuit(sub) => {
                    if stack.contains(&sub.name.as_str()) {
                        return Err(Error::Cycle(sub.name.clone()));
                    }
                    stack.push(sub.name.as_str());
                    let inner = sub.inline_into(out, &format!("{name}."), stack)?;
                    stack.pop();
                    let pins = sub.external_pins().into_iter().map(|e| inner[e.pin.instance][e.pin.pin]).collect();
                    map.push(pins);
                }
            }
        }
        for c in &self.connections {
            let a = map[c.a.instance][c.a.pin];
            let b = map[c.b.instance][c.b.pin];
            out.push_connection(Connection { a, b });
        }
        Ok(map)
    }
}

impl fmt::Display for Subcircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} instances, {} connections, {} external pins)",
            self.name,
            self.instances.len(),
            self.connections.len(),
            self.external_pins().len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GratingParams, WaveguideParams};

    fn mzi_parts() -> (Arc<CompactModel>, Arc<CompactModel>, Arc<CompactModel>, Arc<CompactModel>) {
        (
            Arc::new(CompactModel::grating_coupler(GratingParams::default()).unwrap()),
            Arc::new(CompactModel::y_branch()),
            Arc::new(CompactModel::waveguide(WaveguideParams::with_length(150e-6)).unwrap()),
            Arc::new(CompactModel::waveguide(WaveguideParams::with_length(50e-6)).unwrap()),
        )
    }

    fn scripted_mzi() -> Subcircuit {
        let (grating, y, wg150, wg50) = mzi_parts();
        let mut c = Subcircuit::new("MZI");
        c.add([
            (&grating, "input"),
            (&grating, "output"),
            (&y, "splitter"),
            (&y, "recombiner"),
            (&wg150, "wg_long"),
            (&wg50, "wg_short"),
        ])
        .unwrap();
        c.rename_pin("input", "n2", "input").unwrap();
        c.rename_pin("output", "n2", "output").unwrap();
        c.rename_all("splitter", &["in1", "out1", "out2"]).unwrap();
        c.rename_all("recombiner", &["out1", "in2", "in1"]).unwrap();
        c.connect_many(&[
            ("input", "n1", "splitter", "in1"),
            ("splitter", "out1", "wg_long", "n1"),
            ("splitter", "out2", "wg_short", "n1"),
            ("recombiner", "in1", "wg_long", "n2"),
            ("recombiner", "in2", "wg_short", "n2"),
            ("output", "n1", "recombiner", "out1"),
        ])
        .unwrap();
        c
    }

    #[test]
    fn add_copies_default_pins() {
        let mut c = Subcircuit::new("c");
        let added = c.add([(CompactModel::y_branch(), "splitter")]).unwrap();
        assert_eq!(added.len(), 1);
        let names: Vec<&str> = added[0].pins().iter().map(|p| p.as_str()).collect();
        assert_eq!(names, ["n1", "n2", "n3"]);
    }

    #[test]
    fn shared_model_backs_two_instances() {
        let (grating, ..) = mzi_parts();
        let mut c = Subcircuit::new("c");
        c.add([(&grating, "input"), (&grating, "output")]).unwrap();
        let (a, b) = (c.instance("input").unwrap(), c.instance("output").unwrap());
        match (a.model(), b.model()) {
            (Model::Compact(x), Model::Compact(y)) => assert!(Arc::ptr_eq(x, y)),
            _ => panic!("expected compact models"),
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut c = Subcircuit::new("c");
        c.add_one(CompactModel::y_branch(), "a").unwrap();
        assert_eq!(c.add_one(CompactModel::y_branch(), "a"), Err(Error::DuplicateName("a".into())));
        let err = c.add([(CompactModel::terminator(), "b"), (CompactModel::terminator(), "b")]).unwrap_err();
        assert_eq!(err, Error::DuplicateName("b".into()));
        assert_eq!(c.instances().len(), 1);
        assert!(c.add_one(CompactModel::terminator(), "9bad").is_err());
    }

    #[test]
    fn listing_mzi_exposes_two_pins() {
        let c = scripted_mzi();
        let names: Vec<String> = c.external_pins().into_iter().map(|e| e.name).collect();
        assert_eq!(names, ["input.input", "output.output"]);
        assert_eq!(c.connections().len(), 6);
    }

    #[test]
    fn rename_errors() {
        let mut c = Subcircuit::new("c");
        c.add_one(CompactModel::y_branch(), "y").unwrap();
        assert!(matches!(c.rename_all("y", &["a", "b"]), Err(Error::ArityMismatch { expected: 3, got: 2 })));
        assert!(matches!(c.rename_pin("y", "n1", "n2"), Err(Error::DuplicatePin { .. })));
        assert!(matches!(c.rename_pin("y", "zz", "q"), Err(Error::UnknownPin(_))));
        assert!(matches!(c.rename_all("y", &["a", "a", "b"]), Err(Error::DuplicatePin { .. })));
        c.rename_pin("y", "n2", "output").unwrap();
        c.add_one(CompactModel::terminator(), "t").unwrap();
        c.connect("y", "output", "t", "n1").unwrap();
        // connections bind identity, so renaming afterwards is fine
        c.rename_pin("y", "output", "arm").unwrap();
        assert_eq!(c.describe_connection(&c.connections()[0]), "y.arm <-> t.n1");
    }

    #[test]
    fn connection_errors() {
        let mut c = Subcircuit::new("c");
        c.add([(CompactModel::y_branch(), "a"), (CompactModel::y_branch(), "b")]).unwrap();
        assert!(matches!(c.connect("a", "n1", "a", "n1"), Err(Error::SelfPin(_))));
        assert!(matches!(c.connect("a", "n1", "zz", "n1"), Err(Error::UnknownEndpoint(_))));
        assert!(matches!(c.connect("a", "n9", "b", "n1"), Err(Error::UnknownEndpoint(_))));
        c.connect("a", "n1", "b", "n1").unwrap();
        assert!(matches!(c.connect("a", "n1", "b", "n2"), Err(Error::AlreadyConnected(_))));
        // a failing batch leaves nothing behind
        let err = c.connect_many(&[("a", "n2", "b", "n2"), ("a", "n3", "a", "n2")]);
        assert!(matches!(err, Err(Error::AlreadyConnected(_))));
        assert_eq!(c.connections().len(), 1);
        // connecting a pin to another pin on the same instance is allowed
        c.connect("a", "n2", "a", "n3").unwrap();
    }

    #[test]
    fn external_and_connected_partition_pins() {
        let c = scripted_mzi();
        let total: usize = c.instances().iter().map(|i| i.pins().len()).sum();
        let ext = c.external_pins();
        assert_eq!(ext.len() + 2 * c.connections().len(), total);
        assert!(ext.iter().all(|e| !c.is_connected(e.pin)));
    }

    #[test]
    fn aliases() {
        let mut c = scripted_mzi();
        c.set_port_alias("input", "input", "in").unwrap();
        let names: Vec<String> = c.external_pins().into_iter().map(|e| e.name).collect();
        assert_eq!(names, ["in", "output.output"]);
        assert!(matches!(c.set_port_alias("output", "output", "in"), Err(Error::DuplicateName(_))));
        assert!(matches!(c.set_port_alias("input", "n1", "x"), Err(Error::AlreadyConnected(_))));
    }

    #[test]
    fn flatten_flat_is_identity() {
        let c = scripted_mzi();
        assert_eq!(c.flatten().unwrap(), c);
    }

    #[test]
    fn flatten_nested() {
        let inner = Arc::new(scripted_mzi());
        let mut outer = Subcircuit::new("top");
        outer.add([(&inner, "a"), (&inner, "b")]).unwrap();
        let pins: Vec<String> = outer.instance("a").unwrap().pins().iter().map(|p| p.to_string()).collect();
        assert_eq!(pins, ["input.input", "output.output"]);
        outer.connect("a", "output.output", "b", "input.input").unwrap();
        outer.rename_all("a", &["x", "y"]).unwrap();
        let before: Vec<String> = outer.external_pins().into_iter().map(|e| e.name).collect();
        assert_eq!(before, ["a.x", "b.output.output"]);

        let flat = outer.flatten().unwrap();
        assert!(flat.is_flat());
        assert_eq!(flat.instances().len(), 12);
        assert_eq!(flat.connections().len(), 13);
        assert!(flat.instance("a.wg_long").is_some());
        let after: Vec<String> = flat.external_pins().into_iter().map(|e| e.name).collect();
        assert_eq!(after, before);
        assert_eq!(flat.flatten().unwrap(), flat);
    }

    #[test]
    fn self_containing_subcircuit_is_a_cycle() {
        let mut inner = Subcircuit::new("loop");
        inner.add_one(CompactModel::y_branch(), "y").unwrap();
        let mut outer = Subcircuit::new("loop");
        outer.add_one(inner, "nested").unwrap();
        assert_eq!(outer.flatten().unwrap_err(), Error::Cycle("loop".into()));
    }
}
