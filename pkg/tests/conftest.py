"""Shared fixtures.

Every solution decoded anywhere in the suite (Python decoder or compiled
kernel) is checked against the open-workplace lower bound.
"""
import math

import numpy as np
import pytest

import mmwalbp._kernel as kernel
import mmwalbp.decoder as decoder
from acceptance_log import ACCEPTANCE_LINES
from factories import generated

LB_CHECKS = {"python": 0, "kernel": 0}


def _lower_bound(times, cycle_time):
    total = math.fsum(times)
    return max(1, math.ceil(total / cycle_time - 1e-9)) if len(times) else 0


@pytest.fixture(autouse=True)
def lower_bound_guard(monkeypatch):
    real_schedule = decoder._schedule
    real_batch = kernel.evaluate_batch

    def checked_schedule(order, inst, mode="home"):
        raw = real_schedule(order, inst, mode)
        m = sum(len(station) for station in raw)
        lb = _lower_bound(inst.times, inst.cycle_time)
        assert m >= lb, f"decoded {m} workplaces, below the lower bound {lb}"
        LB_CHECKS["python"] += 1
        return raw

    def checked_batch(X, *args):
        primary, workload, opened, orders = real_batch(X, *args)
        times, C = args[5], args[8]
        lb = _lower_bound(times, C)
        ok = opened[opened != kernel.INFEASIBLE]
        assert (ok >= lb).all(), f"kernel decoded {ok.min()} workplaces, below the lower bound {lb}"
        LB_CHECKS["kernel"] += int(ok.size)
        return primary, workload, opened, orders

    monkeypatch.setattr(decoder, "_schedule", checked_schedule)
    monkeypatch.setattr(kernel, "evaluate_batch", checked_batch)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small4m():
    return generated("small", 4, 3)


def pytest_terminal_summary(terminalreporter):
    terminalreporter.write_line(
        f"lower-bound guard: {LB_CHECKS['python']} decoder schedules and "
        f"{LB_CHECKS['kernel']} kernel evaluations checked"
    )
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

