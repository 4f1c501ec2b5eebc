import math

import numpy as np
import pytest
from scipy import stats as sps

from mmwalbp.errors import PoolError
from mmwalbp.stats import FIXED_F_REF, f_critical, one_way_anova, pool_samples, t_quantile
from oracles import textbook_anova

TEXTBOOK = [[2, 3, 7, 2, 6], [10, 8, 7, 5, 10], [10, 13, 14, 13, 15]]


def test_pool_examples():
    assert pool_samples(np.arange(1, 31), 15).tolist() == [8.0, 23.0]
    assert pool_samples([4.2] * 30, 5).tolist() == [4.2] * 6
    with pytest.raises(PoolError):
        pool_samples(range(10), 3)


def test_pool_450_matches_loop(rng):
    values = rng.normal(100, 15, 450)
    expected = []
    for start in range(0, 450, 15):
        chunk = values[start : start + 15]
        total = 0.0
        for v in chunk:
            total += v
        expected.append(total / 15)
    got = pool_samples(values, 15)
    assert len(got) == 30
    np.testing.assert_allclose(got, expected, rtol=1e-13)
    assert got.mean() == pytest.approx(values.mean(), rel=1e-13)


def test_textbook_f():
    res = one_way_anova(TEXTBOOK)
    # by hand: SS_between = 610/3, SS_within = 54, F = (610/6) / (54/12)
    assert res.f_calculated == pytest.approx(610 / 27, abs=1e-9)
    f, v1, v2, ssb, ssw = textbook_anova(TEXTBOOK)
    assert res.f_calculated == pytest.approx(f, abs=1e-9)
    assert (res.df_between, res.df_within) == (2, 12)
    assert res.ss_between == pytest.approx(610 / 3, abs=1e-9) and res.ss_within == pytest.approx(54, abs=1e-9)
    assert res.p_value == pytest.approx(sps.f_oneway(*TEXTBOOK).pvalue, rel=1e-9)


def test_degrees_of_freedom_for_thirty_samples(rng):
    res = one_way_anova([rng.normal(size=30) for _ in range(3)])
    assert (res.df_between, res.df_within) == (2, 87)


def test_ss_identity(rng):
    groups = [rng.normal(loc, 2.0, 30) for loc in (0.0, 0.5, 1.0)]
    res = one_way_anova(groups)
    allv = np.concatenate(groups)
    ss_total = float(((allv - allv.mean()) ** 2).sum())
    assert res.ss_total == pytest.approx(ss_total, rel=1e-6)


def test_invariance(rng):
    groups = [rng.normal(loc, 3.0, 30) for loc in (10.0, 11.0, 12.5)]
    base = one_way_anova(groups).f_calculated
    assert one_way_anova([g + 1234.5 for g in groups]).f_calculated == pytest.approx(base, rel=1e-9)
    assert one_way_anova([g * 7.25 for g in groups]).f_calculated == pytest.approx(base, rel=1e-9)


def test_degenerate_cases():
    assert one_way_anova([[1.0, 1.0], [1.0, 1.0]]).f_calculated == 0.0
    res = one_way_anova([[1.0, 1.0], [2.0, 2.0]])
    assert math.isinf(res.f_calculated) and res.infinite and res.differs()
    with pytest.raises(ValueError):
        one_way_anova([[1.0, 2.0]])


def test_confidence_intervals():
    res = one_way_anova(TEXTBOOK)
    pooled = math.sqrt(54 / 12)
    half = sps.t.ppf(0.975, 12) * pooled / math.sqrt(5)
    assert res.pooled_sd == pytest.approx(pooled, abs=1e-12)
    assert res.ci_half_widths == pytest.approx((half,) * 3, abs=1e-12)
    assert res.intervals()[0] == pytest.approx((4 - half, 4 + half))


def test_quantiles():
    # standard table values
    assert t_quantile(0.975, 12) == pytest.approx(2.1788, abs=1e-4)
    assert f_critical(2, 12) == pytest.approx(3.8853, abs=1e-4)
    assert f_critical(2, 87) == pytest.approx(3.101, abs=1e-3)
    assert FIXED_F_REF == 4.89


def test_verdict_rule():
    res = one_way_anova(TEXTBOOK)
    assert res.differs() and res.differs(FIXED_F_REF)
    assert not res.differs(f_ref=res.f_calculated)
