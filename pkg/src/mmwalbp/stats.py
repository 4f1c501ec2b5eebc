"""Sample pooling, one-way ANOVA and pooled-standard-deviation confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import PoolError

FIXED_F_REF = 4.89
CONFIDENCE = 0.95


def pool_samples(values: Sequence[float], group_size: int) -> np.ndarray:
    """Means of consecutive, disjoint groups of ``group_size`` values (run order preserved)."""
    x = np.asarray(values, dtype=float)
    if group_size < 1:
        raise PoolError("group size must be >= 1")
    if x.size % group_size:
        raise PoolError(f"{x.size} values cannot be split into groups of {group_size}")
    return x.reshape(-1, group_size).mean(axis=1)


def t_quantile(p: float, df: float) -> float:
    return float(sps.t.ppf(p, df))


def f_critical(v1: int, v2: int, confidence: float = CONFIDENCE) -> float:
    return float(sps.f.ppf(confidence, v1, v2))


@dataclass(frozen=True)
class AnovaResult:
    f_calculated: float
    df_between: int
    df_within: int
    group_means: tuple[float, ...]
    group_sizes: tuple[int, ...]
    ss_between: float
    ss_within: float
    ms_between: float
    ms_within: float
    pooled_sd: float
    ci_half_widths: tuple[float, ...]
    p_value: float

    @property
    def ss_total(self) -> float:
        return self.ss_between + self.ss_within

    @property
    def infinite(self) -> bool:
        return math.isinf(self.f_calculated)

    @property
    def f_ref(self) -> float:
        return f_critical(self.df_between, self.df_within)

    def differs(self, f_ref: float | None = None) -> bool:
        """A difference between groups is declared only when F exceeds the reference value."""
        return self.f_calculated > (self.f_ref if f_ref is None else f_ref)

    def intervals(self) -> list[tuple[float, float]]:
        return [(m - h, m + h) for m, h in zip(self.group_means, self.ci_half_widths)]


def one_way_anova(groups: Sequence[Sequence[float]], confidence: float = CONFIDENCE) -> AnovaResult:
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2:
        raise ValueError("ANOVA needs at least two groups")
    if any(a.size < 2 for a in arrays):
        raise ValueError("every group needs at least two observations")
    k = len(arrays)
    sizes = [a.size for a in arrays]
    N = sum(sizes)
    means = [float(a.mean()) for a in arrays]
    grand = float(np.concatenate(arrays).mean())
    ss_between = float(sum(n * (m - grand) ** 2 for n, m in zip(sizes, means)))
    ss_within = float(sum(((a - m) ** 2).sum() for a, m in zip(arrays, means)))
    v1, v2 = k - 1, N - k
    ms_between = ss_between / v1
    ms_within = ss_within / v2

    # tiny residuals from float arithmetic count as zero variance
    scale = max(abs(grand), max(float(np.abs(a).max()) for a in arrays), 1.0)
    tiny = (1e-12 * scale) ** 2 * N
    if ss_within <= tiny:
        f = 0.0 if ss_between <= tiny else math.inf
    else:
        f = ms_between / ms_within
    p_value = float(sps.f.sf(f, v1, v2)) if math.isfinite(f) else 0.0

    pooled_sd = math.sqrt(ms_within)
    tq = t_quantile(1 - (1 - confidence) / 2, v2)
    half = tuple(tq * pooled_sd / math.sqrt(n) for n in sizes)
    return AnovaResult(
        f_calculated=f,
        df_between=v1,
        df_within=v2,
        group_means=tuple(means),
        group_sizes=tuple(sizes),
        ss_between=ss_between,
        ss_within=ss_within,
        ms_between=ms_between,
        ms_within=ms_within,
        pooled_sd=pooled_sd,
        ci_half_widths=half,
        p_value=p_value,
    )
