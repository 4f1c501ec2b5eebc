import json

import numpy as np
import pytest

from mmwalbp.errors import EmptyPlan, InvalidInstance, JointPrecedenceCycle, ParseError
from mmwalbp.model import (
    STANDARD_DISPLACEMENT,
    DisplacementMatrix,
    Instance,
    MixedModelSpec,
    Task,
    build_mean_model,
    displacement_time,
    format_alb,
    load_alb,
    load_manifest,
    save_manifest,
)

ALB = """<number of tasks>
4

<cycle time>
10

<order strength>
0,5

<task times>
1 3
2 4
3 2
4 5

<precedence relations>
1,2
1,3
3,4

<end>
"""


# -- displacement table ------------------------------------------------------------


@pytest.mark.parametrize(
    "origin,dest,expected",
    [(0, 1, 54), (0, 2, 27), (0, 5, 13.5), (0, 7, 40.5), (1, 7, 13.5), (2, 3, 54), (5, 8, 54), (6, 7, 54), (3, 6, 13.5)],
)
def test_standard_displacement_entries(origin, dest, expected):
    # hand-checked entries of the standard zone matrix
    d = DisplacementMatrix.standard()
    assert displacement_time(d, origin, dest) == expected
    assert d(dest, origin) == expected


def test_standard_displacement_shape_and_zone_four():
    d = np.array(STANDARD_DISPLACEMENT)
    assert d.shape == (9, 9)
    assert (d == d.T).all()
    assert (np.diag(d) == 0).all()
    assert (d[4] == 0).all() and (d[:, 4] == 0).all()
    assert set(np.unique(d)) == {0, 13.5, 27, 40.5, 54}


def test_displacement_rejects_asymmetry():
    bad = [list(r) for r in STANDARD_DISPLACEMENT]
    bad[0][1] = 1
    with pytest.raises(InvalidInstance):
        DisplacementMatrix(bad)


# -- mean model -----------------------------------------------------------------------


def test_mean_model_weighted_average():
    times = np.array([[10.0, 20.0], [5.0, 5.0], [8.0, 0.0]])
    inc = np.array([[1, 1], [1, 0], [1, 0]])
    spec = MixedModelSpec(times, inc, (1, 3), (((1, 2),), ((1, 3), (1, 2))))
    mean, joint = build_mean_model(spec)
    # hand computed: task1 = 10*1/4 + 20*3/4, task2 = 5/4, task3 = 8/4
    assert mean.tolist() == pytest.approx([17.5, 1.25, 2.0], abs=1e-12)
    assert sorted(joint) == [(1, 2), (1, 3)]


def test_mean_model_uniform_plan_and_full_incidence_is_plain_average(rng):
    times = rng.uniform(1, 50, size=(6, 4))
    spec = MixedModelSpec(times, np.ones((6, 4), int), (5, 5, 5, 5), ((),) * 4)
    mean, _ = build_mean_model(spec)
    np.testing.assert_allclose(mean, times.mean(axis=1), rtol=1e-12)


def test_mean_model_errors():
    times = np.ones((2, 2))
    with pytest.raises(EmptyPlan):
        build_mean_model(MixedModelSpec(times, np.ones((2, 2), int), (0, 0), ((), ())))
    with pytest.raises(JointPrecedenceCycle):
        build_mean_model(MixedModelSpec(times, np.ones((2, 2), int), (1, 1), (((1, 2),), ((2, 1),))))
    assert issubclass(JointPrecedenceCycle, InvalidInstance)


# -- instance -------------------------------------------------------------------------


def make_instance(**kw):
    tasks = (Task(1, 300, 0), Task(2, 400, 1), Task(3, 301, 2))
    data = dict(tasks=tasks, edges=((1, 2),), cycle_time=1000)
    data.update(kw)
    return Instance(**data)


def test_instance_lower_bound():
    assert make_instance().lower_bound == 2  # 1001 / 1000 rounds up
    assert make_instance(cycle_time=1001).lower_bound == 1


def test_instance_validation():
    with pytest.raises(InvalidInstance):
        make_instance(cycle_time=350)  # task longer than the cycle
    with pytest.raises(InvalidInstance):
        make_instance(edges=((1, 4),))
    with pytest.raises(InvalidInstance):
        make_instance(edges=((1, 2), (2, 1)))
    with pytest.raises(InvalidInstance):
        make_instance(max_workplaces=0)
    with pytest.raises(InvalidInstance):
        Task(1, 5, 9)


def test_manifest_round_trip(tmp_path):
    inst = make_instance(name="tiny", max_workplaces=2)
    save_manifest(inst, tmp_path / "m.json", generation={"seed": 1})
    back = load_manifest(tmp_path / "m.json")
    assert back.tasks == inst.tasks and back.edges == inst.edges
    assert back.max_workplaces == 2 and back.name == "tiny"
    data = json.loads((tmp_path / "m.json").read_text())
    assert data["schema_version"] == 1 and data["generation"] == {"seed": 1}


def test_manifest_schema_mismatch(tmp_path):
    data = make_instance().to_manifest()
    data["schema_version"] = 99
    (tmp_path / "m.json").write_text(json.dumps(data))
    with pytest.raises(InvalidInstance):
        load_manifest(tmp_path / "m.json")


# -- .alb parsing ----------------------------------------------------------------------


def test_load_alb():
    alb = load_alb(ALB)
    assert alb.n == 4 and alb.cycle_time == 10
    assert alb.times == (3, 4, 2, 5)
    assert alb.edges == ((1, 2), (1, 3), (3, 4))
    n, times, edges = alb
    assert n == 4


def test_alb_round_trip():
    alb = load_alb(ALB)
    again = load_alb(format_alb(alb.n, alb.times, alb.edges, alb.cycle_time))
    assert again == alb


@pytest.mark.parametrize(
    "mutate,line",
    [
        (lambda s: s.replace("<order strength>", "<mystery>"), 7),
        (lambda s: s.replace("2 4\n", "1 4\n"), 12),
        (lambda s: s.replace("3,4", "3,9"), 19),
        (lambda s: s.replace("4 5\n", ""), None),
        (lambda s: s.replace("2 4\n", "2 x\n"), 12),
    ],
)
def test_alb_errors_carry_line_numbers(mutate, line):
    with pytest.raises(ParseError) as info:
        load_alb(mutate(ALB))
    assert info.value.line == line
