import json

import numpy as np
import pytest

from factories import gen_spec, generated
from mmwalbp import benchgen
from mmwalbp.errors import GenError, ParseError
from mmwalbp.model import Instance, read_alb
from oracles import dfs_closure


def source(size):
    return read_alb(benchgen.bundled_source(size))


def test_bundled_sources_parse():
    assert [source(s).n for s in ("small", "medium", "large")] == [20, 50, 100]


def test_manifest_shape(small4m):
    m = small4m.manifest
    assert m["n"] == 20 and m["cycle_time"] == 1000 and m["max_workplaces"] == 3
    assert m["generation"]["plan"] == [50, 50, 50, 50]
    assert Instance.from_manifest(json.loads(json.dumps(m))).times == small4m.instance.times


def test_default_plans():
    assert sum(benchgen.equal_plan(4, 200)) == 200
    plan50 = gen_spec("small", 50, 0).resolved_plan()
    assert sum(plan50) == 998 and set(plan50) == {19, 20} and len(plan50) == 50
    with pytest.raises(GenError):
        gen_spec("small", 3, 0).resolved_plan()
    assert gen_spec("small", 3, 0, plan=(1, 2, 3)).resolved_plan() == (1, 2, 3)


def test_determinism():
    a = generated("medium", 50, 9).manifest
    b = generated("medium", 50, 9).manifest
    c = generated("medium", 50, 10).manifest
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a != c


def test_zone_four_never_emitted():
    zones = np.concatenate([generated("large", 4, s).instance.zones for s in range(20)])
    assert 4 not in zones
    counts = np.bincount(zones, minlength=9)
    allowed = counts[[0, 1, 2, 3, 5, 6, 7, 8]]
    # 2000 draws over 8 zones: every zone within 40% of the expected 250
    assert (np.abs(allowed - 250) < 100).all()


def test_every_task_present_with_guard():
    for s in range(10):
        inc = np.array(generated("small", 4, s).manifest["generation"]["incidence"])
        assert inc.any(axis=1).all()


def test_single_model_full_incidence_reproduces_source():
    g = generated("small", 1, 0, plan=(1,))
    assert list(g.instance.times) == [float(t) for t in source("small").times]
    assert sorted(g.instance.edges) == sorted(source("small").edges)


def test_per_model_graphs_are_restrictions_of_the_source():
    alb = source("medium")
    full = dfs_closure(alb.n, alb.edges)
    g = generated("medium", 4, 1)
    for m, edges in enumerate(g.mixed.per_model_precedence):
        present = g.mixed.incidence[:, m] == 1
        got = dfs_closure(alb.n, edges)
        idx = np.flatnonzero(present)
        assert (got[np.ix_(idx, idx)] == full[np.ix_(idx, idx)]).all()
        touched = {t for e in edges for t in e}
        assert all(present[t - 1] for t in touched)


def test_half_workload_on_average():
    total = sum(source("small").times)
    for models in (4, 50):
        ratios = [generated("small", models, s).manifest["generation"]["workload"] / total for s in range(100)]
        assert abs(np.mean(ratios) - 0.5) <= 0.05, (models, np.mean(ratios))


def test_guard_failure(monkeypatch):
    monkeypatch.setattr(benchgen, "MAX_REDRAWS", 0)
    with pytest.raises(GenError):
        generated("small", 1, 0, plan=(1,))


def test_guard_disabled_allows_absent_tasks():
    g = generated("small", 1, 0, plan=(1,), require_presence=False)
    assert 0.0 in g.instance.times


def test_parse_error_propagates(tmp_path):
    bad = tmp_path / "bad.alb"
    bad.write_text("<number of tasks>\n2\n<task times>\n1 3\n<bogus>\n")
    with pytest.raises(ParseError):
        benchgen.generate(benchgen.GenSpec(str(bad), 4))
