//! JSON container format. Every object carries a `kind` tag; wherever an
//! object is expected, a string names another object of the workspace.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::delta::Delta;
use crate::error::{DclError, Result};
use crate::graph::{Graph, GraphMorphism};
use crate::injectivity::{plain_formula, Ambient, Derivation, InjTheory, Rule};
use crate::satisfaction::ValidationReport;
use crate::signature::{
    ConstraintSymbol, Counterexample, Dependency, Evidence, Multiplicity, Semantics, Signature, SoundnessReport,
    Verdict, Witness,
};
use crate::sketch::{ConstraintDeclaration, Sketch, SketchMorphism};
use crate::slice::{SliceMorphism, TypedInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object {
    Graph(Arc<Graph>),
    Morphism(GraphMorphism),
    Instance(TypedInstance),
    SliceMorphism(SliceMorphism),
    Delta(Delta),
    Signature(Arc<Signature>),
    Sketch(Sketch),
    SketchMorphism {
        morphism: SketchMorphism,
        from: Sketch,
        to: Sketch,
    },
    Theory(InjTheory),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Graph(_) => "graph",
            Object::Morphism(_) => "morphism",
            Object::Instance(_) => "instance",
            Object::SliceMorphism(_) => "slice_morphism",
            Object::Delta(_) => "delta",
            Object::Signature(_) => "signature",
            Object::Sketch(_) => "sketch",
            Object::SketchMorphism { .. } => "sketch_morphism",
            Object::Theory(_) => "theory",
        }
    }

    fn mismatch(&self, expected: &str) -> DclError {
        DclError::Parse(format!("expected a {expected}, found a {}", self.kind()))
    }

    pub fn into_graph(self) -> Result<Arc<Graph>> {
        match self {
            Object::Graph(g) => Ok(g),
            o => Err(o.mismatch("graph")),
        }
    }

    pub fn into_morphism(self) -> Result<GraphMorphism> {
        match self {
            Object::Morphism(m) => Ok(m),
            o => Err(o.mismatch("morphism")),
        }
    }

    pub fn into_instance(self) -> Result<TypedInstance> {
        match self {
            Object::Instance(t) => Ok(t),
            o => Err(o.mismatch("instance")),
        }
    }

    pub fn into_slice_morphism(self) -> Result<SliceMorphism> {
        match self {
            Object::SliceMorphism(m) => Ok(m),
            o => Err(o.mismatch("slice_morphism")),
        }
    }

    pub fn into_signature(self) -> Result<Arc<Signature>> {
        match self {
            Object::Signature(s) => Ok(s),
            o => Err(o.mismatch("signature")),
        }
    }

    pub fn into_sketch(self) -> Result<Sketch> {
        match self {
            Object::Sketch(s) => Ok(s),
            o => Err(o.mismatch("sketch")),
        }
    }

    pub fn into_theory(self) -> Result<InjTheory> {
        match self {
            Object::Theory(t) => Ok(t),
            o => Err(o.mismatch("theory")),
        }
    }
}

fn perr(path: &str, msg: impl std::fmt::Display) -> DclError {
    DclError::Parse(format!("{path}: {msg}"))
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        DclError::Parse(m) => DclError::Parse(m),
        e => perr(path, e),
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| perr(path, "expected an object"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| perr(path, format!("missing field `{key}`")))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| perr(path, "expected a string"))
}

fn string_map(v: Option<&Value>, path: &str) -> Result<BTreeMap<String, String>> {
    let Some(v) = v else { return Ok(BTreeMap::new()) };
    object(v, path)?
        .iter()
        .map(|(k, x)| Ok((k.clone(), string(x, &format!("{path}.{k}"))?.to_string())))
        .collect()
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| perr(path, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| Ok(string(x, &format!("{path}[{i}]"))?.to_string()))
        .collect()
}

fn to_map(m: &BTreeMap<String, String>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

/// Named objects, parsed on first use.
#[derive(Debug, Default)]
pub struct Workspace {
    raw: BTreeMap<String, Value>,
    parsed: BTreeMap<String, Object>,
    resolving: Vec<String>,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, object: Object) {
        self.parsed.insert(name.into(), object);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        let mut all: Vec<&str> = self.raw.keys().chain(self.parsed.keys()).map(String::as_str).collect();
        all.sort();
        all.dedup();
        all.into_iter()
    }

    /// Loads a document: one object, or a bundle `{"kind": "bundle",
    /// "objects": {...}, "main": name}`. Returns the main object, which for
    /// a single object is also stored under `name`.
    pub fn load_str(&mut self, text: &str, name: &str) -> Result<Object> {
        let v: Value = serde_json::from_str(text).map_err(|e| perr(name, format!("malformed JSON: {e}")))?;
        let m = object(&v, name)?;
        if m.get("kind").and_then(Value::as_str) == Some("bundle") {
            let objects = object(field(m, "objects", name)?, &format!("{name}.objects"))?;
            for (k, x) in objects {
                if self.raw.contains_key(k) || self.parsed.contains_key(k) {
                    return Err(perr(name, format!("object `{k}` defined twice")));
                }
                self.raw.insert(k.clone(), x.clone());
            }
            for k in objects.keys() {
                self.resolve(k, &format!("{name}.objects.{k}"))?;
            }
            let main = match m.get("main") {
                Some(x) => string(x, &format!("{name}.main"))?.to_string(),
                None if objects.len() == 1 => objects.keys().next().expect("one object").clone(),
                None => return Err(perr(name, "bundle with several objects needs `main`")),
            };
            self.resolve(&main, &format!("{name}.main"))
        } else {
            let o = self.decode(&v, name)?;
            self.parsed.insert(name.to_string(), o.clone());
            Ok(o)
        }
    }

    /// Loads a file; a single object is named after the file stem.
    pub fn load_file(&mut self, path: &Path) -> Result<Object> {
        let text = std::fs::read_to_string(path).map_err(|e| perr(&path.display().to_string(), e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("main").to_string();
        self.load_str(&text, &stem).map_err(|e| match e {
            DclError::Parse(m) => DclError::Parse(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn get(&mut self, name: &str) -> Result<Object> {
        self.resolve(name, name)
    }

    fn resolve(&mut self, name: &str, path: &str) -> Result<Object> {
        if let Some(o) = self.parsed.get(name) {
            return Ok(o.clone());
        }
        let Some(v) = self.raw.get(name).cloned() else {
            return Err(perr(path, format!("unknown object `{name}`")));
        };
        if self.resolving.iter().any(|r| r == name) {
            return Err(perr(path, format!("reference cycle through `{name}`")));
        }
        self.resolving.push(name.to_string());
        let o = self.decode(&v, name);
        self.resolving.pop();
        let o = o?;
        self.parsed.insert(name.to_string(), o.clone());
        Ok(o)
    }

    pub fn decode(&mut self, v: &Value, path: &str) -> Result<Object> {
        if let Some(name) = v.as_str() {
            return self.resolve(name, path);
        }
        let m = object(v, path)?;
        let kind = string(field(m, "kind", path)?, &format!("{path}.kind"))?;
        match kind {
            "graph" => Ok(Object::Graph(Arc::new(self.graph_body(m, path)?))),
            "morphism" => Ok(Object::Morphism(self.morphism_body(m, path)?)),
            "instance" => Ok(Object::Instance(self.instance_body(m, path)?)),
            "slice_morphism" => Ok(Object::SliceMorphism(self.slice_body(m, path)?)),
            "delta" => {
                let left = self.slice_morphism(field(m, "left", path)?, &format!("{path}.left"))?;
                let right = self.slice_morphism(field(m, "right", path)?, &format!("{path}.right"))?;
                Ok(Object::Delta(at(path, Delta::new(left, right))?))
            }
            "signature" => Ok(Object::Signature(Arc::new(self.signature_body(m, path)?))),
            "sketch" => Ok(Object::Sketch(self.sketch_body(m, path)?)),
            "sketch_morphism" => {
                let from = self.sketch(field(m, "from", path)?, &format!("{path}.from"))?;
                let to = self.sketch(field(m, "to", path)?, &format!("{path}.to"))?;
                let map = at(
                    path,
                    GraphMorphism::new(
                        from.carrier().clone(),
                        to.carrier().clone(),
                        string_map(m.get("nodes"), &format!("{path}.nodes"))?,
                        string_map(m.get("arrows"), &format!("{path}.arrows"))?,
                    ),
                )?;
                let morphism = match m.get("declarations") {
                    Some(d) => SketchMorphism::new(map, string_map(Some(d), &format!("{path}.declarations"))?),
                    None => at(path, SketchMorphism::inferred(map, &from, &to))?,
                };
                Ok(Object::SketchMorphism { morphism, from, to })
            }
            "theory" => Ok(Object::Theory(self.theory_body(m, path)?)),
            other => Err(perr(path, format!("unknown kind `{other}`"))),
        }
    }

    pub fn graph(&mut self, v: &Value, path: &str) -> Result<Arc<Graph>> {
        at(path, self.decode(v, path)?.into_graph())
    }

    pub fn morphism(&mut self, v: &Value, path: &str) -> Result<GraphMorphism> {
        at(path, self.decode(v, path)?.into_morphism())
    }

    pub fn instance(&mut self, v: &Value, path: &str) -> Result<TypedInstance> {
        at(path, self.decode(v, path)?.into_instance())
    }

    pub fn slice_morphism(&mut self, v: &Value, path: &str) -> Result<SliceMorphism> {
        at(path, self.decode(v, path)?.into_slice_morphism())
    }

    pub fn signature(&mut self, v: &Value, path: &str) -> Result<Arc<Signature>> {
        at(path, self.decode(v, path)?.into_signature())
    }

    pub fn sketch(&mut self, v: &Value, path: &str) -> Result<Sketch> {
        at(path, self.decode(v, path)?.into_sketch())
    }

    fn graph_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<Graph> {
        let nodes = match m.get("nodes") {
            Some(n) => strings(n, &format!("{path}.nodes"))?,
            None => Vec::new(),
        };
        let mut arrows = Vec::new();
        if let Some(a) = m.get("arrows") {
            for (id, ends) in object(a, &format!("{path}.arrows"))? {
                let p = format!("{path}.arrows.{id}");
                let ends = strings(ends, &p)?;
                let [src, tgt] = <[String; 2]>::try_from(ends).map_err(|_| perr(&p, "expected [source, target]"))?;
                arrows.push((id.clone(), src, tgt));
            }
        }
        at(path, Graph::new(nodes, arrows))
    }

    fn morphism_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<GraphMorphism> {
        let dom = self.graph(field(m, "dom", path)?, &format!("{path}.dom"))?;
        let cod = self.graph(field(m, "cod", path)?, &format!("{path}.cod"))?;
        at(
            path,
            GraphMorphism::new(
                dom,
                cod,
                string_map(m.get("nodes"), &format!("{path}.nodes"))?,
                string_map(m.get("arrows"), &format!("{path}.arrows"))?,
            ),
        )
    }

    fn instance_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<TypedInstance> {
        let schema = self.graph(field(m, "schema", path)?, &format!("{path}.schema"))?;
        let elements = string_map(m.get("elements"), &format!("{path}.elements"))?;
        let mut links = Vec::new();
        if let Some(l) = m.get("links") {
            for (id, x) in object(l, &format!("{path}.links"))? {
                let p = format!("{path}.links.{id}");
                let parts = strings(x, &p)?;
                let [src, tgt, ty] =
                    <[String; 3]>::try_from(parts).map_err(|_| perr(&p, "expected [source, target, type]"))?;
                links.push((id.clone(), src, tgt, ty));
            }
        }
        let e: Vec<(&str, &str)> = elements.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let l: Vec<(&str, &str, &str, &str)> = links
            .iter()
            .map(|(a, b, c, d)| (a.as_str(), b.as_str(), c.as_str(), d.as_str()))
            .collect();
        at(path, TypedInstance::build(schema, &e, &l))
    }

    fn slice_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<SliceMorphism> {
        let from = self.instance(field(m, "from", path)?, &format!("{path}.from"))?;
        let to = self.instance(field(m, "to", path)?, &format!("{path}.to"))?;
        let to = at(path, to.with_schema(from.schema().clone()))?;
        let map = at(
            path,
            GraphMorphism::new(
                from.carrier().clone(),
                to.carrier().clone(),
                string_map(m.get("nodes"), &format!("{path}.nodes"))?,
                string_map(m.get("arrows"), &format!("{path}.arrows"))?,
            ),
        )?;
        at(path, SliceMorphism::new(from, to, map))
    }

    fn semantics(&mut self, v: &Value, arity: &Arc<Graph>, path: &str) -> Result<Semantics> {
        let m = object(v, path)?;
        let ty = string(field(m, "type", path)?, &format!("{path}.type"))?;
        Ok(match ty {
            "multiplicity" => {
                let value = string(field(m, "value", path)?, &format!("{path}.value"))?;
                Semantics::Multiplicity(at(path, Multiplicity::parse(value))?)
            }
            "key" => Semantics::Key,
            "subset" => Semantics::Subset,
            "subset4" => Semantics::CompositeSubset4,
            "comm" => Semantics::Commutativity,
            "jm" => Semantics::JointlyMonic {
                strict: m.get("strict").and_then(Value::as_bool).unwrap_or(false),
            },
            "regular" => Semantics::Regular(self.slice_morphism(field(m, "formula", path)?, &format!("{path}.formula"))?),
            "lifting" => Semantics::Lifting {
                m: self.morphism(field(m, "m", path)?, &format!("{path}.m"))?,
                n: self.morphism(field(m, "n", path)?, &format!("{path}.n"))?,
            },
            "table" => {
                let mut entries = Vec::new();
                for (name, x) in object(field(m, "entries", path)?, &format!("{path}.entries"))? {
                    entries.push((name.clone(), self.instance(x, &format!("{path}.entries.{name}"))?));
                }
                at(path, Semantics::table(arity, entries))?
            }
            other => return Err(perr(path, format!("unknown semantics `{other}`"))),
        })
    }

    fn signature_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<Signature> {
        let mut sig = match m.get("extends") {
            None | Some(Value::Null) => Signature::new(),
            Some(Value::String(s)) if s == "builtin" => Signature::builtin(),
            Some(_) => return Err(perr(path, "`extends` must be \"builtin\"")),
        };
        if let Some(symbols) = m.get("symbols") {
            let symbols = symbols.as_array().ok_or_else(|| perr(path, "`symbols` must be an array"))?;
            for (i, s) in symbols.iter().enumerate() {
                let p = format!("{path}.symbols[{i}]");
                let sm = object(s, &p)?;
                let name = string(field(sm, "name", &p)?, &format!("{p}.name"))?;
                let arity = self.graph(field(sm, "arity", &p)?, &format!("{p}.arity"))?;
                let sem = self.semantics(field(sm, "semantics", &p)?, &arity, &format!("{p}.semantics"))?;
                at(&p, ConstraintSymbol::new(name, arity, sem).and_then(|s| sig.add_symbol(s)))?;
            }
        }
        if let Some(deps) = m.get("dependencies") {
            let deps = deps.as_array().ok_or_else(|| perr(path, "`dependencies` must be an array"))?;
            for (i, d) in deps.iter().enumerate() {
                let p = format!("{path}.dependencies[{i}]");
                let dm = object(d, &p)?;
                let id = string(field(dm, "id", &p)?, &format!("{p}.id"))?;
                let from = string(field(dm, "from", &p)?, &format!("{p}.from"))?;
                let to = string(field(dm, "to", &p)?, &format!("{p}.to"))?;
                let map = at(&p, self.dependency_map(&sig, from, to, dm, &p))?;
                at(&p, sig.add_dependency(Dependency::new(id, from, to, map)))?;
            }
        }
        Ok(sig)
    }

    fn dependency_map(
        &mut self,
        sig: &Signature,
        from: &str,
        to: &str,
        m: &Map<String, Value>,
        path: &str,
    ) -> Result<GraphMorphism> {
        GraphMorphism::new(
            sig.symbol(to)?.arity().clone(),
            sig.symbol(from)?.arity().clone(),
            string_map(m.get("nodes"), &format!("{path}.nodes"))?,
            string_map(m.get("arrows"), &format!("{path}.arrows"))?,
        )
    }

    fn sketch_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<Sketch> {
        let carrier = self.graph(field(m, "carrier", path)?, &format!("{path}.carrier"))?;
        let sig = match m.get("signature") {
            Some(s) => self.signature(s, &format!("{path}.signature"))?,
            None => Arc::new(Signature::builtin()),
        };
        let mut decls = Vec::new();
        if let Some(ds) = m.get("declarations") {
            let ds = ds.as_array().ok_or_else(|| perr(path, "`declarations` must be an array"))?;
            for (i, d) in ds.iter().enumerate() {
                let p = format!("{path}.declarations[{i}]");
                let dm = object(d, &p)?;
                let id = string(field(dm, "id", &p)?, &format!("{p}.id"))?;
                let label = string(field(dm, "label", &p)?, &format!("{p}.label"))?;
                let arity = at(&p, sig.symbol(label))?.arity().clone();
                let binding = at(
                    &p,
                    GraphMorphism::new(
                        arity,
                        carrier.clone(),
                        string_map(dm.get("nodes"), &format!("{p}.nodes"))?,
                        string_map(dm.get("arrows"), &format!("{p}.arrows"))?,
                    ),
                )?;
                decls.push(ConstraintDeclaration::new(id, label, binding));
            }
        }
        at(path, Sketch::new(carrier, sig, decls))
    }

    fn theory_body(&mut self, m: &Map<String, Value>, path: &str) -> Result<InjTheory> {
        let a = object(field(m, "ambient", path)?, &format!("{path}.ambient"))?;
        let ambient = match string(field(a, "kind", path)?, &format!("{path}.ambient.kind"))? {
            "graph" => Ambient::Graphs,
            "slice" => Ambient::Slice(self.graph(field(a, "over", path)?, &format!("{path}.ambient.over"))?),
            other => return Err(perr(path, format!("unknown ambient `{other}`"))),
        };
        let mut formulas = Vec::new();
        if let Some(fs) = m.get("formulas") {
            for (name, f) in object(fs, &format!("{path}.formulas"))? {
                let p = format!("{path}.formulas.{name}");
                let f = match (&ambient, self.decode(f, &p)?) {
                    (Ambient::Graphs, Object::Morphism(g)) => plain_formula(&g),
                    (_, Object::SliceMorphism(s)) => s,
                    (_, o) => return Err(perr(&p, o.mismatch("formula"))),
                };
                formulas.push((name.clone(), f));
            }
        }
        at(path, InjTheory::new(ambient, formulas))
    }
}

pub fn graph_json(g: &Graph) -> Value {
    let arrows: Map<String, Value> = g
        .arrows()
        .map(|(a, arrow)| (a.to_string(), json!([arrow.src, arrow.tgt])))
        .collect();
    json!({"kind": "graph", "nodes": g.nodes().collect::<Vec<_>>(), "arrows": arrows})
}

pub fn morphism_json(m: &GraphMorphism) -> Value {
    json!({
        "kind": "morphism",
        "dom": graph_json(m.dom()),
        "cod": graph_json(m.cod()),
        "nodes": to_map(m.node_map()),
        "arrows": to_map(m.arrow_map()),
    })
}

pub fn instance_json(t: &TypedInstance) -> Value {
    let links: Map<String, Value> = t
        .carrier()
        .arrows()
        .map(|(l, a)| (l.to_string(), json!([a.src, a.tgt, t.typing().arrow(l)])))
        .collect();
    json!({
        "kind": "instance",
        "schema": graph_json(t.schema()),
        "elements": to_map(t.typing().node_map()),
        "links": links,
    })
}

pub fn slice_morphism_json(f: &SliceMorphism) -> Value {
    json!({
        "kind": "slice_morphism",
        "from": instance_json(f.from()),
        "to": instance_json(f.to()),
        "nodes": to_map(f.map().node_map()),
        "arrows": to_map(f.map().arrow_map()),
    })
}

pub fn delta_json(d: &Delta) -> Value {
    json!({"kind": "delta", "left": slice_morphism_json(d.left()), "right": slice_morphism_json(d.right())})
}

fn semantics_json(s: &Semantics) -> Value {
    match s {
        Semantics::Multiplicity(m) => json!({"type": "multiplicity", "value": m.to_string()}),
        Semantics::Key => json!({"type": "key"}),
        Semantics::Subset => json!({"type": "subset"}),
        Semantics::CompositeSubset4 => json!({"type": "subset4"}),
        Semantics::Commutativity => json!({"type": "comm"}),
        Semantics::JointlyMonic { strict } => json!({"type": "jm", "strict": strict}),
        Semantics::Regular(f) => json!({"type": "regular", "formula": slice_morphism_json(f)}),
        Semantics::Lifting { m, n } => json!({"type": "lifting", "m": morphism_json(m), "n": morphism_json(n)}),
        Semantics::Table(entries) => {
            let e: Map<String, Value> = entries.iter().map(|(k, t)| (k.clone(), instance_json(t))).collect();
            json!({"type": "table", "entries": e})
        }
    }
}

fn symbol_json(s: &ConstraintSymbol) -> Value {
    json!({"name": s.name(), "arity": graph_json(s.arity()), "semantics": semantics_json(s.semantics())})
}

fn dependency_json(d: &Dependency) -> Value {
    json!({
        "id": d.id(),
        "from": d.from(),
        "to": d.to(),
        "nodes": to_map(d.arity_map().node_map()),
        "arrows": to_map(d.arity_map().arrow_map()),
    })
}

/// Symbols and dependencies beyond the builtin signature are listed under
/// `"extends": "builtin"` when the builtin part is intact.
pub fn signature_json(sig: &Signature) -> Value {
    let builtin = Signature::builtin();
    let intact = builtin.symbols().all(|s| sig.symbol(s.name()).ok() == Some(s))
        && builtin.dependencies().all(|d| sig.dependency(d.id()) == Some(d));
    let symbols: Vec<Value> = sig
        .symbols()
        .filter(|s| !intact || builtin.symbol(s.name()).is_err())
        .map(symbol_json)
        .collect();
    let deps: Vec<Value> = sig
        .dependencies()
        .filter(|d| !intact || builtin.dependency(d.id()).is_none())
        .map(dependency_json)
        .collect();
    let mut m = Map::new();
    m.insert("kind".into(), json!("signature"));
    if intact {
        m.insert("extends".into(), json!("builtin"));
    }
    m.insert("symbols".into(), Value::Array(symbols));
    m.insert("dependencies".into(), Value::Array(deps));
    Value::Object(m)
}

pub fn declaration_json(d: &ConstraintDeclaration) -> Value {
    json!({
        "id": d.id(),
        "label": d.label(),
        "nodes": to_map(d.binding().node_map()),
        "arrows": to_map(d.binding().arrow_map()),
    })
}

pub fn sketch_json(s: &Sketch) -> Value {
    json!({
        "kind": "sketch",
        "carrier": graph_json(s.carrier()),
        "signature": signature_json(s.signature()),
        "declarations": s.declarations().map(declaration_json).collect::<Vec<_>>(),
    })
}

pub fn theory_json(t: &InjTheory) -> Value {
    let (ambient, plain) = match t.ambient() {
        Ambient::Graphs => (json!({"kind": "graph"}), true),
        Ambient::Slice(g) => (json!({"kind": "slice", "over": graph_json(g)}), false),
    };
    let formulas: Map<String, Value> = t
        .formulas()
        .iter()
        .map(|(k, f)| {
            let v = if plain { morphism_json(f.map()) } else { slice_morphism_json(f) };
            (k.clone(), v)
        })
        .collect();
    json!({"kind": "theory", "ambient": ambient, "formulas": formulas})
}

pub fn object_json(o: &Object) -> Value {
    match o {
        Object::Graph(g) => graph_json(g),
        Object::Morphism(m) => morphism_json(m),
        Object::Instance(t) => instance_json(t),
        Object::SliceMorphism(f) => slice_morphism_json(f),
        Object::Delta(d) => delta_json(d),
        Object::Signature(s) => signature_json(s),
        Object::Sketch(s) => sketch_json(s),
        Object::SketchMorphism { morphism, from, to } => json!({
            "kind": "sketch_morphism",
            "from": sketch_json(from),
            "to": sketch_json(to),
            "nodes": to_map(morphism.graph_map().node_map()),
            "arrows": to_map(morphism.graph_map().arrow_map()),
            "declarations": to_map(morphism.decl_map()),
        }),
        Object::Theory(t) => theory_json(t),
    }
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::None => Value::Null,
        Witness::Counts(c) => json!({"counts": c}),
        Witness::Keys(k) => json!({"keys": k}),
        Witness::Inclusion(i) => json!({"inclusion": i}),
        Witness::Factorizations(fs) => json!({
            "factorizations": fs.iter().map(|f| json!({"given": f.given, "through": f.through})).collect::<Vec<_>>()
        }),
        Witness::TableEntry(e) => json!({"table_entry": e}),
    }
}

pub fn evidence_json(e: &Evidence) -> Value {
    json!({"restricted": instance_json(&e.restricted), "witness": witness_json(&e.witness)})
}

pub fn counterexample_json(c: &Counterexample) -> Value {
    json!({
        "restricted": instance_json(&c.restricted),
        "offending": c.offending,
        "located": c.located,
        "reason": c.reason,
    })
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Valid(e) => json!({"status": "valid", "evidence": evidence_json(e)}),
        Verdict::Invalid(c) => json!({"status": "invalid", "counterexample": counterexample_json(c)}),
        Verdict::Unknown(why) => json!({"status": "unknown", "reason": why}),
    }
}

/// Serialized evidence (or counterexample) of a verdict; equal bytes mean
/// equal canonical evidence.
pub fn verdict_bytes(v: &Verdict) -> Vec<u8> {
    serde_json::to_vec(&verdict_json(v)).expect("JSON values serialize")
}

/// Bytes of the coordinate-free part of a verdict: the evidence of a valid
/// verdict, or the canonical counterexample without located ids.
pub fn canonical_bytes(v: &Verdict) -> Vec<u8> {
    let value = match v {
        Verdict::Valid(e) => json!({"status": "valid", "evidence": evidence_json(e)}),
        Verdict::Invalid(c) => json!({
            "status": "invalid",
            "restricted": instance_json(&c.restricted),
            "offending": c.offending,
            "reason": c.reason,
        }),
        Verdict::Unknown(_) => json!({"status": "unknown"}),
    };
    serde_json::to_vec(&value).expect("JSON values serialize")
}

pub fn report_json(r: &ValidationReport) -> Value {
    let decls: Vec<Value> = r
        .declarations
        .iter()
        .map(|d| {
            let mut v = verdict_json(&d.verdict);
            let m = v.as_object_mut().expect("verdict object");
            m.insert("id".into(), json!(d.declaration));
            m.insert("label".into(), json!(d.label));
            m.entry("evidence").or_insert(Value::Null);
            m.entry("counterexample").or_insert(Value::Null);
            v
        })
        .collect();
    json!({"kind": "report", "overall": r.overall.to_string(), "declarations": decls})
}

pub fn derivation_json(d: &Derivation) -> Value {
    let mut m = Map::new();
    m.insert("rule".into(), json!(d.rule.name()));
    m.insert("conclusion".into(), slice_morphism_json(&d.conclusion));
    match &d.rule {
        Rule::Axiom { name } => {
            m.insert("formula".into(), json!(name));
        }
        Rule::Cancellation { second } => {
            m.insert("second".into(), slice_morphism_json(second));
        }
        Rule::Pushout { along } => {
            m.insert("along".into(), slice_morphism_json(along));
        }
        Rule::Identity | Rule::Composition | Rule::CoproductMacro => {}
    }
    m.insert("premises".into(), Value::Array(d.premises.iter().map(derivation_json).collect()));
    Value::Object(m)
}

pub fn soundness_json(r: &SoundnessReport) -> Value {
    json!({
        "dependency": r.dependency,
        "checked": r.checked,
        "valid": r.valid,
        "violations": r.violations,
        "sound": r.is_sound(),
        "witness": r.witness.as_ref().map(instance_json),
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn roundtrip(o: Object) {
        let text = to_pretty(&object_json(&o));
        let back = Workspace::new().load_str(&text, "x").unwrap();
        assert_eq!(back, o);
        assert_eq!(to_pretty(&object_json(&back)), text);
    }

    #[test]
    fn objects_roundtrip() {
        roundtrip(Object::Graph(fixtures::fig1_schema()));
        roundtrip(Object::Instance(fixtures::fig1_instance(None)));
        roundtrip(Object::Sketch(fixtures::fig1_sketch().unwrap()));
        roundtrip(Object::Sketch(fixtures::fig3_sketch().unwrap()));
        roundtrip(Object::SliceMorphism(fixtures::fig2b()));
        roundtrip(Object::Theory(fixtures::seed_theory_arrow()));
        roundtrip(Object::Theory(fixtures::seed_theory_graphs()));
        roundtrip(Object::Morphism(fixtures::fig3_binding()));
    }

    #[test]
    fn references_resolve_within_a_bundle() {
        let text = r#"{
            "kind": "bundle",
            "main": "t",
            "objects": {
                "g": {"kind": "graph", "nodes": ["A", "B"], "arrows": {"r": ["A", "B"]}},
                "t": {"kind": "instance", "schema": "g", "elements": {"a": "A"}}
            }
        }"#;
        let mut ws = Workspace::new();
        let t = ws.load_str(text, "b").unwrap().into_instance().unwrap();
        assert_eq!(t.element_count(), 1);
        assert_eq!(ws.get("g").unwrap().kind(), "graph");
    }

    #[test]
    fn errors_carry_locations() {
        let mut ws = Workspace::new();
        let e = ws.load_str("{\"kind\": \"graph\", \"nodes\": [1]}", "doc").unwrap_err();
        assert!(e.to_string().contains("doc.nodes[0]"), "{e}");
        assert!(ws.load_str("{", "doc2").is_err());
        let e = ws
            .load_str(r#"{"kind": "graph", "nodes": ["A"], "arrows": {"r": ["A", "Z"]}}"#, "doc3")
            .unwrap_err();
        assert!(matches!(e, DclError::Parse(_)));
        let cyc = r#"{"kind": "bundle", "main": "a", "objects": {"a": "b", "b": "a"}}"#;
        assert!(Workspace::new().load_str(cyc, "c").is_err());
    }
}
