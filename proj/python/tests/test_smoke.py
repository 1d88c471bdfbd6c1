import json
import math
import pathlib

import numpy as np
import pytest

import causalsem as cs

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"

SCM = {
    "nodes": ["x", "y", "z"],
    "edges": [
        {"source": "x", "target": "y", "weight": 0.8},
        {"source": "y", "target": "z", "weight": -0.5},
    ],
    "noise": {
        "x": {"family": "uniform", "scale": 1.0},
        "y": {"family": "laplace", "scale": 1.0},
        "z": {"family": "uniform", "scale": 1.0},
    },
    "seed": 11,
}


def chain_sample(n=5000):
    return cs.Scm.from_json(json.dumps(SCM)).sample(n)


def test_bundled_data_loads():
    d = cs.load_csv(str(DATA / "travel_sample.csv"), str(DATA / "travel_config.json"))
    assert d.cols == 14
    assert d.values.shape == (d.rows, d.cols)
    assert d.values.min() >= 0.0 and d.values.max() <= 1.0


def test_correlation_is_symmetric_unit_diagonal():
    c = cs.correlation(chain_sample(), "spearman")
    assert c.names == ["x", "y", "z"]
    assert np.allclose(c.values, c.values.T)
    assert np.allclose(np.diag(c.values), 1.0)


def test_bivariate_normal_cdf_independent_case():
    assert cs.bivariate_normal_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-12)


def test_graph_round_trip_and_d_separation():
    g = cs.Graph(["a", "b", "c"])
    g.add_directed("a", "b", 0.5)
    g.add_directed("b", "c")
    assert cs.Graph.from_json(g.to_json()) == g
    assert cs.d_separated(g, "a", "c", ["b"])
    assert not cs.d_separated(g, "a", "c", [])
    assert g.to_dot().startswith("digraph")


def test_discovery_algorithms_run():
    d = chain_sample()
    c = cs.correlation(d)
    for algo in (cs.pc, cs.fci, cs.fges):
        r = algo(c)
        assert r.graph.adjacent("x", "y") and r.graph.adjacent("y", "z")
        assert not r.graph.adjacent("x", "z")
    lingam = cs.direct_lingam(d)
    assert lingam.causal_order == ["x", "y", "z"]
    assert lingam.graph.directed("x", "y")


def test_knowledge_is_respected():
    d = chain_sample()
    bk = cs.Knowledge()
    bk.tiers = [["z"], ["x", "y"]]
    r = cs.fges(cs.correlation(d), cs.DiscoveryConfig(), bk)
    assert cs.knowledge_violations(r.graph, bk) == []


def test_fit_recovers_chain_coefficients():
    d = chain_sample(20000)
    c = cs.correlation(d)
    g = cs.Graph(["x", "y", "z"])
    g.add_directed("x", "y")
    g.add_directed("y", "z")
    fitted, report, paths = cs.fit_sem(g, c, d.rows)
    assert fitted.converged
    assert report.dof == 1
    assert 0.0 <= report.cfi <= 1.0
    edges = {(a, b): w for a, b, _, _, w in paths.edges()}
    cov = cs.Scm.from_json(json.dumps(SCM)).implied_covariance()
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    assert edges[("x", "y")] == pytest.approx(corr[0, 1], abs=0.02)
    assert edges[("y", "z")] == pytest.approx(corr[1, 2], abs=0.02)
    assert json.loads(report.to_json())["dof"] == 1


def test_pipeline_is_deterministic():
    d = cs.load_csv(str(DATA / "travel_sample.csv"), str(DATA / "travel_config.json"))
    bk = cs.load_knowledge(str(DATA / "travel_knowledge.json"), d)
    a = cs.run_pipeline(d, bk, ["fges", "pc"])
    b = cs.run_pipeline(d, bk, ["pc", "fges"])
    assert a.algorithms == ["pc", "fges"]
    assert a.to_json() == b.to_json()
    assert a.selected is not None
    for _, _, _, _, w in a.simplified_winner.edges():
        assert abs(w) > 0.25


def test_errors_map_to_python_exceptions():
    d = chain_sample(100)
    with pytest.raises(ValueError):
        cs.correlation(d, "kendall")
    with pytest.raises(ValueError):
        cs.run_pipeline(d, cs.Knowledge(), [])
    with pytest.raises(ValueError):
        cs.Graph.from_json("{")


def test_random_scm_is_reproducible():
    a = cs.random_scm(5, 0.5, "laplace", 3).sample(50)
    b = cs.random_scm(5, 0.5, "laplace", 3).sample(50)
    assert np.array_equal(a.values, b.values)
    assert not math.isnan(a.values.sum())
