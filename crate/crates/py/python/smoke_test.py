"""Smoke test for the `dcl` extension module.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`, or copy
`target/release/libdcl.so` to `dcl.so` somewhere on PYTHONPATH.
"""

import json
import os
import sys

import dcl

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "..", "core", "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def main():
    g = dcl.Graph(["A", "B"], [("r", "A", "B")])
    assert g.nodes() == ["A", "B"]
    assert g.arrows() == [("r", "A", "B")]
    renamed = dcl.Graph(["y", "x"], [("e", "y", "x")])
    assert g.canonical() == renamed.canonical()

    t = dcl.Instance.build(g, [("a", "A"), ("b1", "B"), ("b2", "B")], [("l1", "a", "b1", "r"), ("l2", "a", "b2", "r")])
    assert t.element_count() == 5
    assert t.type_of("l1") == "r"
    assert t.is_isomorphic(dcl.Instance.from_json(t.to_json()))

    sketch = dcl.load(fixture("fig1_sketch.json"))
    good = dcl.load(fixture("fig1_instance.json"))
    bad = dcl.load(fixture("fig1_extra_wheel.json"))
    assert sketch.validate(good)["overall"] == "valid"
    report = sketch.validate(bad, jobs=2)
    assert report["overall"] == "invalid"
    assert [d["id"] for d in report["declarations"] if d["status"] == "invalid"] == ["has"]

    fragment = dcl.load(fixture("vehicle_fragment.json"))
    pulled = fragment.migrate(good)
    assert pulled.schema() == fragment.dom()

    open_sketch = dcl.load(fixture("fig3_sketch.json"))
    assert not open_sketch.is_closed()
    assert open_sketch.close().is_closed()
    try:
        open_sketch.validate(dcl.load(fixture("fig3_instance.json")))
    except dcl.ConstraintError as e:
        assert "not closed" in str(e)
    else:
        raise AssertionError("open sketch accepted")

    theory = dcl.load(fixture("theory_arrow.json"))
    with open(fixture("goal_coproduct.json")) as f:
        goal = f.read()
    proof = theory.prove(goal)
    assert proof["status"] == "derivable"
    assert [r for r in proof["script"] if r != "axiom"] == ["pushout", "pushout", "composition"]
    assert theory.prove(goal, depth=1)["status"] == "unknown"
    assert dcl.formula_key_of(goal) == dcl.formula_key_of(json.dumps(json.loads(goal)))

    summary = dcl.satax(trials=20, seed=7)
    assert summary["passed"] == 20 and summary["failed"] == []

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
