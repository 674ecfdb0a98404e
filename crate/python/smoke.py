"""Smoke test for the aligned_graphs_py extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/aligned_graphs-*.whl
then run `python python/smoke.py` from the repository root.
"""

import json
import pathlib

import aligned_graphs_py as ag

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return ag.Graph.from_json((CORPUS / f"{name}.json").read_text())


def main():
    banana = load("banana_xy")
    assert banana.classify() == "NotAligned"
    circuit, pair = banana.alignment_witness()
    assert sorted(pair) == ["e", "f"] and sorted(circuit) == ["e", "f"]
    assert not banana.neron_model_exists()
    assert banana.failing_strata() == [["x", "y"]]
    assert banana.specialize(["x"]).classify() == "Treelike"

    b23 = load("banana_23")
    assert b23.is_aligned()
    wg = b23.pull_back({"x": 1})
    assert str(wg.quotient_component_group()) == "Z/5"
    assert wg.critical_group().order == wg.kirchhoff_order() == 5
    assert wg.degree_bound() == 2
    assert wg.degree_bound("subdivided") == 1

    loop4 = load("loop_x4").pull_back()
    assert loop4.critical_group().factors == [4]
    assert loop4.quotient_component_group().is_trivial()

    report = json.loads(load("tree").report())
    assert report["schema"] == "aligned-graphs/1"
    assert report["degree_bound"]["degree_bound"] == 0

    k4 = ag.WeightedGraph.from_thicknesses(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)])
    assert str(k4.critical_group()) == "Z/4 x Z/4"

    assert ag.bound_b(1, 2) == 5 and ag.bound_b(2, 3) == 55
    assert ag.torsion_order_bound(1) == 35
    assert ag.torsion_order_bound(1, n=6) == 130

    u, d, v = ag.smith_normal_form([[2, 4], [6, 8]])
    assert d == [[2, 0], [0, 4]]
    h, _ = ag.hermite_normal_form([[2, 4], [6, 8]])
    assert h[0][0] > 0

    try:
        ag.Graph.from_json("{")
    except ValueError as e:
        assert "line 1" in str(e)
    else:
        raise AssertionError("malformed JSON accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
