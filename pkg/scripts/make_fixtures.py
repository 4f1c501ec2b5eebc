"""Write the bundled stand-in SALBP-1 instances (small/medium/large) in .alb format.

The original benchmark files are not redistributed here. These replacements
have 20/50/100 tasks and task-time totals chosen so that, at cycle time 1000,
the derived mean workloads come out near 5.1, 3.1 and 7.4 cycle times. Run from the repository root:

    python scripts/make_fixtures.py
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from mmwalbp.model import format_alb
from mmwalbp.precedence import build_complete_matrix

OUT = Path(__file__).resolve().parents[1] / "src" / "mmwalbp" / "data"

# name, n, mean task time, spread, edge probability, seed
FIXTURES = [
    ("small_n20", 20, 560.0, 0.45, 0.14, 20_26),
    ("medium_n50", 50, 140.0, 0.80, 0.08, 50_25),
    ("large_n100", 100, 150.0, 0.80, 0.05, 100_34),
]


def transitive_reduction(n: int, edges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    closure = build_complete_matrix(edges, n).closure
    keep = []
    for a, b in edges:
        # drop (a,b) when some c with a<c<b satisfies a->c->b
        if not any(closure[a - 1, c] and closure[c, b - 1] for c in range(n)):
            keep.append((a, b))
    return keep


def make(n: int, mean: float, spread: float, p: float, seed: int):
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(np.log1p(spread**2))
    times = rng.lognormal(np.log(mean) - sigma**2 / 2, sigma, size=n)
    times = np.clip(np.rint(times), 1, 999).astype(int)
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p]
    edges = transitive_reduction(n, edges)
    closure = build_complete_matrix(edges, n).closure
    order_strength = closure.sum() / (n * (n - 1) / 2)
    return times.tolist(), edges, order_strength


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, n, mean, spread, p, seed in FIXTURES:
        times, edges, os_ = make(n, mean, spread, p, seed)
        (OUT / f"{name}.alb").write_text(format_alb(n, times, edges, cycle_time=1000))
        print(f"{name}: total time {sum(times)}, {len(edges)} edges, order strength {os_:.3f}")


if __name__ == "__main__":
    main()
