"""Complete (transitive) precedence matrix and precedence repair of task sequences."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CyclicPrecedence


@dataclass(frozen=True, eq=False)
class CompletePrecedenceMatrix:
    """Transitive precedence relation over tasks 1..n.

    ``closure[i, j]`` (0-based) is True iff task i+1 precedes task j+1 directly
    or indirectly. ``counts[j]`` is the number of (direct or indirect)
    predecessors of task j+1, i.e. the extra bottom row of the classic M matrix.
    """

    closure: np.ndarray
    counts: np.ndarray
    successors: tuple[tuple[int, ...], ...]
    predecessors: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return self.closure.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """The (n+1) x n integer matrix: relation rows plus the counts row."""
        return np.vstack([self.closure.astype(np.int64), self.counts[None, :]])

    def precedes(self, i: int, j: int) -> bool:
        """1-based query: does task i (transitively) precede task j?"""
        return bool(self.closure[i - 1, j - 1])


def _topological_order(n: int, succ: list[list[int]]) -> list[int]:
    indeg = [0] * n
    for row in succ:
        for j in row:
            indeg[j] += 1
    stack = [i for i in range(n - 1, -1, -1) if indeg[i] == 0]
    order = []
    while stack:
        i = stack.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack.append(j)
    if len(order) != n:
        stuck = sorted(i + 1 for i in range(n) if indeg[i] > 0)
        raise CyclicPrecedence(f"precedence cycle among tasks {stuck[:10]}")
    return order


def build_complete_matrix(edges: Iterable[tuple[int, int]], n: int) -> CompletePrecedenceMatrix:
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValueError(f"edge ({a},{b}) outside 1..{n}")
        if a == b:
            raise CyclicPrecedence(f"task {a} cannot precede itself")
        succ[a - 1].append(b - 1)

    order = _topological_order(n, succ)
    closure = np.zeros((n, n), dtype=bool)
    for i in reversed(order):
        row = closure[i]
        for j in succ[i]:
            row[j] = True
            row |= closure[j]

    closure.setflags(write=False)
    counts = closure.sum(axis=0).astype(np.int64)
    counts.setflags(write=False)
    successors = tuple(tuple(np.flatnonzero(closure[i]).tolist()) for i in range(n))
    predecessors = tuple(tuple(np.flatnonzero(closure[:, j]).tolist()) for j in range(n))
    return CompletePrecedenceMatrix(closure, counts, successors, predecessors)


def correct_sequence(seq: Sequence[int], m: CompletePrecedenceMatrix) -> list[int]:
    """Reorder a task permutation (1-based ids) so that it respects precedence.

    The sequence is scanned cyclically; a task is emitted as soon as all its
    predecessors have been emitted. Only a working copy of the counts row is
    modified.
    """
    n = m.n
    if len(seq) != n:
        raise ValueError(f"sequence has {len(seq)} entries, expected {n}")
    remaining = m.counts.tolist()
    successors = m.successors
    done = [False] * n
    out: list[int] = []
    i = 0
    while len(out) < n:
        a = seq[i] - 1
        if not done[a] and remaining[a] == 0:
            done[a] = True
            out.append(a + 1)
            for k in successors[a]:
                remaining[k] -= 1
        i += 1
        if i == n:
            i = 0
    return out


def is_topological(order: Sequence[int], m: CompletePrecedenceMatrix) -> bool:
    pos = {task: idx for idx, task in enumerate(order)}
    if sorted(pos) != list(range(1, m.n + 1)):
        return False
    i_idx, j_idx = np.nonzero(m.closure)
    return all(pos[i + 1] < pos[j + 1] for i, j in zip(i_idx.tolist(), j_idx.tolist()))
