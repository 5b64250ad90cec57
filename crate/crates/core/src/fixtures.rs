//! Worked examples: the vehicle/driver schema with its instance and
//! mutations, the two injectivity formulas over `A -r→ B`, and a sketch
//! with a jointly monic span.

use std::sync::Arc;

use crate::error::Result;
use crate::graph::{Graph, GraphMorphism};
use crate::injectivity::{plain_formula, Ambient, InjTheory};
use crate::signature::{arrow_arity, span_arity, ConstraintSymbol, Semantics, Signature};
use crate::sketch::{ConstraintDeclaration, DefaultPolicy, Sketch};
use crate::slice::{restrict, SliceMorphism, TypedInstance};

pub const FIG1_ASSOCIATIONS: [&str; 7] = ["covers", "drives", "employs", "has", "has_dr", "lcdBy", "of"];
pub const FIG1_ATTRIBUTES: [&str; 4] = ["bdate", "code", "name", "whData"];

/// The vehicle schema carrier.
pub fn fig1_schema() -> Arc<Graph> {
    Arc::new(
        Graph::builder()
            .nodes([
                "Company", "Date", "Driver", "License", "String", "VehType", "Vehicle", "WhData", "Wheel",
            ])
            .arrow("drives", "Driver", "Vehicle")
            .arrow("of", "Vehicle", "VehType")
            .arrow("lcdBy", "Driver", "License")
            .arrow("covers", "License", "VehType")
            .arrow("has", "Vehicle", "Wheel")
            .arrow("has_dr", "Vehicle", "Wheel")
            .arrow("employs", "Company", "Driver")
            .arrow("name", "Driver", "String")
            .arrow("bdate", "Driver", "Date")
            .arrow("code", "Wheel", "String")
            .arrow("whData", "Vehicle", "WhData")
            .build()
            .expect("static schema"),
    )
}

/// Targeted breakages of the valid vehicle instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Mutation {
    /// A fifth wheel on `v1`.
    ExtraWheel,
    /// `d2` gets the name and birth date of `d1`.
    DuplicateKey,
    /// `d1` drives the bus, which no licence of `d1` covers.
    UncoveredDrive,
}

impl Fig1Mutation {
    pub const ALL: [Fig1Mutation; 3] = [
        Fig1Mutation::ExtraWheel,
        Fig1Mutation::DuplicateKey,
        Fig1Mutation::UncoveredDrive,
    ];

    /// The only declaration the mutation should break.
    pub fn target(self) -> &'static str {
        match self {
            Fig1Mutation::ExtraWheel => "has",
            Fig1Mutation::DuplicateKey => "key",
            Fig1Mutation::UncoveredDrive => "licensed",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Fig1Mutation::ExtraWheel => "extra-wheel",
            Fig1Mutation::DuplicateKey => "duplicate-key",
            Fig1Mutation::UncoveredDrive => "uncovered-drive",
        }
    }
}

#[derive(Default)]
struct Data {
    elements: Vec<(String, String)>,
    links: Vec<(String, String, String, String)>,
}

impl Data {
    fn el(&mut self, sort: &str, ids: &[&str]) {
        for id in ids {
            self.elements.push((id.to_string(), sort.to_string()));
        }
    }

    fn link(&mut self, ty: &str, src: &str, tgt: &str) {
        self.named(&format!("{ty}:{src}>{tgt}"), ty, src, tgt);
    }

    fn named(&mut self, id: &str, ty: &str, src: &str, tgt: &str) {
        self.links.push((id.into(), src.into(), tgt.into(), ty.into()));
    }

    fn instance(&self, schema: Arc<Graph>) -> TypedInstance {
        let elements: Vec<(&str, &str)> = self.elements.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let links: Vec<(&str, &str, &str, &str)> = self
            .links
            .iter()
            .map(|(a, b, c, d)| (a.as_str(), b.as_str(), c.as_str(), d.as_str()))
            .collect();
        TypedInstance::build(schema, &elements, &links).expect("static instance")
    }
}

/// The shipped vehicle instance, optionally mutated.
pub fn fig1_instance(mutation: Option<Fig1Mutation>) -> TypedInstance {
    use Fig1Mutation::*;
    let mut d = Data::default();
    d.el("Company", &["acme"]);
    d.el("Driver", &["d1", "d2"]);
    d.el("String", &["s_ann", "s_bob", "s_R16", "s_R22"]);
    d.el("Date", &["t_1975", "t_1980"]);
    d.el("License", &["L1", "L2"]);
    d.el("VehType", &["bus", "car", "truck"]);
    d.el("Vehicle", &["v1", "v2", "v3"]);
    d.el("WhData", &["wd_large", "wd_small"]);
    let wheels: Vec<String> = (1..=14).map(|i| format!("w{i}")).collect();
    for w in &wheels {
        d.el("Wheel", &[w]);
    }

    d.link("employs", "acme", "d1");
    d.link("employs", "acme", "d2");
    d.link("name", "d1", "s_ann");
    d.link("bdate", "d1", "t_1980");
    if mutation == Some(DuplicateKey) {
        d.link("name", "d2", "s_ann");
        d.link("bdate", "d2", "t_1980");
    } else {
        d.link("name", "d2", "s_bob");
        d.link("bdate", "d2", "t_1975");
    }
    d.link("lcdBy", "d1", "L1");
    d.link("lcdBy", "d2", "L2");
    d.named("c", "covers", "L1", "car");
    d.named("c'", "covers", "L1", "car");
    d.link("covers", "L2", "car");
    d.link("covers", "L2", "truck");

    let fleet = [
        ("v1", "car", "wd_small", 1..=4, 1..=2, "s_R16"),
        ("v2", "truck", "wd_large", 5..=10, 5..=8, "s_R22"),
        ("v3", "bus", "wd_large", 11..=14, 11..=12, "s_R16"),
    ];
    for (v, ty, wd, all, driving, code) in fleet {
        d.link("of", v, ty);
        d.link("whData", v, wd);
        for i in all {
            let w = format!("w{i}");
            d.link("has", v, &w);
            d.link("code", &w, code);
        }
        for i in driving {
            d.link("has_dr", v, &format!("w{i}"));
        }
    }
    if mutation == Some(ExtraWheel) {
        d.el("Wheel", &["w15"]);
        d.link("has", "v1", "w15");
        d.link("code", "w15", "s_R16");
    }
    if mutation == Some(UncoveredDrive) {
        d.link("drives", "d1", "v3");
    } else {
        d.link("drives", "d1", "v1");
    }
    d.link("drives", "d2", "v2");
    d.instance(fig1_schema())
}

fn bind(arity: &Arc<Graph>, carrier: &Arc<Graph>, nodes: &[(&str, &str)], arrows: &[(&str, &str)]) -> GraphMorphism {
    GraphMorphism::from_pairs(arity.clone(), carrier.clone(), nodes, arrows).expect("static binding")
}

fn arrow_binding(carrier: &Arc<Graph>, a: &str) -> GraphMorphism {
    let arrow = carrier.arrow(a).expect("carrier arrow");
    bind(&arrow_arity(), carrier, &[("A", &arrow.src), ("B", &arrow.tgt)], &[("r", a)])
}

/// Arity of the wheel-data table: `T ←of- V -wd→ D`.
pub fn wheel_table_arity() -> Arc<Graph> {
    Arc::new(Graph::new(["V", "T", "D"], [("of", "V", "T"), ("wd", "V", "D")]).expect("static arity"))
}

fn wheel_table_binding(carrier: &Arc<Graph>) -> GraphMorphism {
    bind(
        &wheel_table_arity(),
        carrier,
        &[("V", "Vehicle"), ("T", "VehType"), ("D", "WhData")],
        &[("of", "of"), ("wd", "whData")],
    )
}

/// The builtin signature plus the two wheel multiplicities and the
/// wheel-data table, whose admissible configurations are the shipped one
/// and the empty one.
pub fn fig1_signature() -> Result<Signature> {
    let mut sig = Signature::builtin();
    sig.add_symbol(ConstraintSymbol::multiplicity("[1..4,6]")?)?;
    sig.add_symbol(ConstraintSymbol::multiplicity("[1..2,4]")?)?;
    let arity = wheel_table_arity();
    let shipped = restrict(&fig1_instance(None), &wheel_table_binding(&fig1_schema()))?.with_schema(arity.clone())?;
    let table = Semantics::table(&arity, [("empty", TypedInstance::empty(arity.clone())), ("fixture", shipped)])?;
    sig.add_symbol(ConstraintSymbol::new("c_wh", arity, table)?)?;
    Ok(sig)
}

/// The explicit declarations of the vehicle schema, before defaults.
pub fn fig1_declarations(carrier: &Arc<Graph>) -> Vec<ConstraintDeclaration> {
    let mut out = vec![
        ConstraintDeclaration::new("has", "[1..4,6]", arrow_binding(carrier, "has")),
        ConstraintDeclaration::new("has_dr", "[1..2,4]", arrow_binding(carrier, "has_dr")),
        ConstraintDeclaration::new("of", "[1]", arrow_binding(carrier, "of")),
        ConstraintDeclaration::new("drives", "[0..1]", arrow_binding(carrier, "drives")),
        ConstraintDeclaration::new("employs", "[0..*]", arrow_binding(carrier, "employs")),
    ];
    let parallel = crate::signature::parallel_arity();
    out.push(ConstraintDeclaration::new(
        "incl",
        "[⇒]",
        bind(&parallel, carrier, &[("A", "Vehicle"), ("B", "Wheel")], &[("r1", "has_dr"), ("r2", "has")]),
    ));
    out.push(ConstraintDeclaration::new(
        "key",
        "[key]",
        bind(
            &crate::signature::key_arity(2),
            carrier,
            &[("K", "Driver"), ("V1", "String"), ("V2", "Date")],
            &[("k1", "name"), ("k2", "bdate")],
        ),
    ));
    out.push(ConstraintDeclaration::new(
        "licensed",
        "[⇒]4",
        bind(
            &crate::signature::square_arity(),
            carrier,
            &[("A", "Driver"), ("B", "Vehicle"), ("C", "License"), ("D", "VehType")],
            &[("p1", "drives"), ("p2", "of"), ("q1", "lcdBy"), ("q2", "covers")],
        ),
    ));
    out.push(ConstraintDeclaration::new("c_wh", "c_wh", wheel_table_binding(carrier)));
    out
}

pub fn fig1_policy() -> DefaultPolicy {
    DefaultPolicy::new(FIG1_ASSOCIATIONS, FIG1_ATTRIBUTES)
}

/// The vehicle sketch with default multiplicities elaborated.
pub fn fig1_sketch() -> Result<Sketch> {
    let carrier = fig1_schema();
    let sig = Arc::new(fig1_signature()?);
    let decls = fig1_declarations(&carrier);
    Sketch::new(carrier, sig, decls)?.elaborate_defaults(&fig1_policy())
}

/// `{a}` included in `a -r→ b`, over `A -r→ B`: every `A` element has an
/// `r` link.
pub fn fig2a() -> SliceMorphism {
    let schema = arrow_arity();
    let p = TypedInstance::build(schema.clone(), &[("a", "A")], &[]).expect("static");
    let q = TypedInstance::build(schema, &[("a", "A"), ("b", "B")], &[("e", "a", "b", "r")]).expect("static");
    let map = GraphMorphism::from_pairs(p.carrier().clone(), q.carrier().clone(), &[("a", "a")], &[]).expect("static");
    SliceMorphism::new(p, q, map).expect("static")
}

/// Two `r` links out of `a` sent to two parallel links into one `b`: the
/// `r` links of an element share their target.
pub fn fig2b() -> SliceMorphism {
    let schema = arrow_arity();
    let p = TypedInstance::build(
        schema.clone(),
        &[("a", "A"), ("b1", "B"), ("b2", "B")],
        &[("e1", "a", "b1", "r"), ("e2", "a", "b2", "r")],
    )
    .expect("static");
    let q = TypedInstance::build(
        schema,
        &[("a", "A"), ("b", "B")],
        &[("e1", "a", "b", "r"), ("e2", "a", "b", "r")],
    )
    .expect("static");
    let map = GraphMorphism::from_pairs(
        p.carrier().clone(),
        q.carrier().clone(),
        &[("a", "a"), ("b1", "b"), ("b2", "b")],
        &[("e1", "e1"), ("e2", "e2")],
    )
    .expect("static");
    SliceMorphism::new(p, q, map).expect("static")
}

/// Regular symbols for the two formulas, named after the multiplicities
/// they implement.
pub fn fig2_symbols() -> Vec<ConstraintSymbol> {
    [("[1..*]reg", fig2a()), ("[0..1]reg", fig2b())]
        .into_iter()
        .map(|(name, f)| ConstraintSymbol::new(name, arrow_arity(), Semantics::Regular(f)).expect("static"))
        .collect()
}

/// `Driver ←holder- License -class→ VehType`.
pub fn fig3_carrier() -> Arc<Graph> {
    Arc::new(
        Graph::new(
            ["Driver", "License", "VehType"],
            [("holder", "License", "Driver"), ("class", "License", "VehType")],
        )
        .expect("static carrier"),
    )
}

/// The binding of the span arity onto the licence span.
pub fn fig3_binding() -> GraphMorphism {
    bind(
        &span_arity(),
        &fig3_carrier(),
        &[("R", "License"), ("A", "Driver"), ("B", "VehType")],
        &[("f", "holder"), ("g", "class")],
    )
}

/// A sketch with the single declaration `[jm]` on the licence span; not
/// closed under the builtin dependencies.
pub fn fig3_sketch() -> Result<Sketch> {
    Sketch::new(
        fig3_carrier(),
        Arc::new(Signature::builtin()),
        [ConstraintDeclaration::new("span", "[jm]", fig3_binding())],
    )
}

/// One licence with two holders: the span is jointly monic but its first
/// leg is not a function.
pub fn fig3_instance() -> TypedInstance {
    TypedInstance::build(
        fig3_carrier(),
        &[("L1", "License"), ("d1", "Driver"), ("d2", "Driver"), ("car", "VehType")],
        &[
            ("h1", "L1", "d1", "holder"),
            ("h2", "L1", "d2", "holder"),
            ("k1", "L1", "car", "class"),
        ],
    )
    .expect("static instance")
}

/// Seed theory over `A -r→ B`: totality and single-valuedness of `r`.
pub fn seed_theory_arrow() -> InjTheory {
    InjTheory::new(Ambient::Slice(arrow_arity()), [("e", fig2a()), ("u", fig2b())]).expect("static theory")
}

/// Seed theory over plain graphs: every node has an outgoing and an
/// incoming arrow.
pub fn seed_theory_graphs() -> InjTheory {
    let x = Arc::new(Graph::discrete(["x"]).expect("static"));
    let out = Arc::new(Graph::new(["x", "y"], [("e", "x", "y")]).expect("static"));
    let inc = Arc::new(Graph::new(["x", "y"], [("e", "y", "x")]).expect("static"));
    let f = |cod: &Arc<Graph>| {
        plain_formula(&GraphMorphism::from_pairs(x.clone(), cod.clone(), &[("x", "x")], &[]).expect("static"))
    };
    InjTheory::new(Ambient::Graphs, [("out", f(&out)), ("in", f(&inc))]).expect("static theory")
}

/// Inclusion of the vehicle fragment into the vehicle schema.
pub fn vehicle_fragment() -> GraphMorphism {
    let schema = fig1_schema();
    let nodes = ["String", "VehType", "Vehicle", "WhData", "Wheel"];
    let arrows = ["code", "has", "has_dr", "of", "whData"];
    let fragment = Arc::new(schema.subgraph(nodes, arrows).expect("static fragment"));
    let n: Vec<(&str, &str)> = nodes.iter().map(|x| (*x, *x)).collect();
    let a: Vec<(&str, &str)> = arrows.iter().map(|x| (*x, *x)).collect();
    GraphMorphism::from_pairs(fragment, schema, &n, &a).expect("static inclusion")
}

/// The files shipped in the `fixtures` directory, by file name.
pub fn shipped_files() -> Result<Vec<(String, serde_json::Value)>> {
    use crate::injectivity::coproduct_formula;
    use crate::io::{instance_json, morphism_json, sketch_json, slice_morphism_json, theory_json};
    let mut out = vec![
        ("fig1_sketch".to_string(), sketch_json(&fig1_sketch()?)),
        ("fig1_instance".to_string(), instance_json(&fig1_instance(None))),
    ];
    for m in Fig1Mutation::ALL {
        out.push((format!("fig1_{}", m.name().replace('-', "_")), instance_json(&fig1_instance(Some(m)))));
    }
    out.push(("vehicle_fragment".into(), morphism_json(&vehicle_fragment())));
    out.push(("fig3_sketch".into(), sketch_json(&fig3_sketch()?)));
    out.push(("fig3_instance".into(), instance_json(&fig3_instance())));
    out.push(("theory_arrow".into(), theory_json(&seed_theory_arrow())));
    out.push(("theory_graphs".into(), theory_json(&seed_theory_graphs())));
    let t = seed_theory_arrow();
    let goal = coproduct_formula(t.formula("e").expect("seed"), t.formula("u").expect("seed"))?;
    out.push(("goal_coproduct".into(), slice_morphism_json(&goal)));
    Ok(out.into_iter().map(|(k, v)| (format!("{k}.json"), v)).collect())
}
