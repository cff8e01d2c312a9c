"""Smoke test for the reformine Python module."""

import json

import reformine

FOLDING = "find x : int(0..100)\nsuch that\n    1*(2+3)*4 = x\n"
LAGS = """\
given d : int(0..3)
find x, y, z : int(0..12)
such that
    forAll h : int(1..3) .
        toInt(h = 1)*x + toInt(h = 2)*y + toInt(h = 3)*z + d <= toInt(h = 1)*y + toInt(h = 2)*z + toInt(h = 3)*x
"""


def main():
    spec = reformine.Spec(FOLDING)
    assert str(spec) == FOLDING
    assert "#ReferenceToDecisionVariable" in spec.annotated()

    graph = json.loads(spec.graph("json"))
    assert len(graph["vertices"]) == 16 and len(graph["edges"]) == 15

    commutes = spec.matches("commute")
    assert len(commutes) == 4, commutes
    folded = spec.apply(0, "const-fold")
    assert "20 = x" in str(folded)
    assert folded.canonical_hash() == spec.canonical_hash()
    assert spec.normalize() == folded.normalize()

    result = spec.solve()
    assert result["status"] == "sat" and result["solutions"][0]["x"] == 20

    lags = reformine.Spec(LAGS)
    instances = lags.sample_instances(5, seed=3)
    assert instances == lags.sample_instances(5, seed=3)
    report = lags.explore(instances, iterations=30, seed=1)
    assert report["best"]["nodes"] <= report["baseline"]["nodes"]
    assert report == lags.explore(instances, iterations=30, seed=1)
    assert lags.solve({"d": 1})["status"] == "unsat"

    assert abs(reformine.uct_score(5.0, 10, 100, 1.41421) - 1.45969) < 1e-4
    assert reformine.reward(7, 7) == 0.5
    assert "implied-sum" in reformine.rules()
    names = reformine.feature_names()
    assert len(names) == len(spec.features())
    assert reformine.distance(spec.features(), spec.features()) == 0.0
    assert reformine.parse_instance("letting d be 2") == {"d": 2}

    try:
        reformine.Spec("find x :")
    except ValueError as e:
        assert "syntax" in str(e)
    else:
        raise AssertionError("parse error not raised")
    print("smoke test passed")


if __name__ == "__main__":
    main()
