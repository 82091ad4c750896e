"""Brute-force ground truth for fillers, lifts and fibrations.

Nothing here calls the constructive recursion except the optional
cross-check in :func:`verify_fibration`, which compares its output with
the exhaustive solution list.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from ._kernels import kernels
from .errors import BudgetExceeded, DimensionOutOfRange, HornError
from .horn import Horn, LiftProblem, lift_horn
from .simplicial import (SimplicialHom, TruncatedSimplicialAlgebra,
                         circle_free_mod, is_levelwise_surjective)

DEFAULT_BUDGET = 10 ** 8


def default_budget() -> int:
    env = os.environ.get("MALTSEV_KAN_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _horn_rows(X: TruncatedSimplicialAlgebra, horn: Horn):
    n = horn.n
    if not 1 <= n <= X.N:
        raise DimensionOutOfRange(f"horn dimension {n} outside 1..{X.N}")
    rows = [X.d(n, i) for i, _ in horn.faces]
    wanted = [x for _, x in horn.faces]
    return rows, wanted


def brute_fill(X: TruncatedSimplicialAlgebra, horn: Horn) -> list[int]:
    """Every ``x`` in ``X_n`` with ``d_i x = x_i`` (``i != k``), ascending."""
    rows, wanted = _horn_rows(X, horn)
    return kernels.fiber_scan(np.stack(rows).astype(np.int64), np.asarray(wanted, np.int64)).tolist()


def brute_lift(problem: LiftProblem) -> list[int]:
    """Every ``x`` with ``f(x) = y`` and ``d_i x = x_i``, ascending."""
    f, horn, y = problem
    rows, wanted = _horn_rows(f.source, horn)
    rows = np.stack([f.maps[horn.n], *rows]).astype(np.int64)
    return kernels.fiber_scan(rows, np.asarray([y, *wanted], np.int64)).tolist()


class _Meter:
    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def charge(self, amount: int):
        self.used += amount
        if self.used > self.budget:
            raise BudgetExceeded(f"candidate budget {self.budget} exhausted")


def _preimages(f: SimplicialHom, n: int) -> list[np.ndarray]:
    order = np.argsort(f.maps[n], kind="stable")
    counts = np.bincount(f.maps[n], minlength=f.target.size(n))
    return np.split(order, np.cumsum(counts)[:-1])


def lift_horns_over(f: SimplicialHom, n: int, k: int, y: int,
                    pre: Optional[list[np.ndarray]] = None,
                    meter: Optional[_Meter] = None) -> Iterator[Horn]:
    """All matching ``(n, k)``-horns in the source with ``d_i y = f(x_i)``,
    in lexicographic order of the face tuple.  Faces are chosen by
    backtracking over ``i`` ascending, filtering each candidate pool by the
    matching relations with the faces already chosen."""
    X, Y = f.source, f.target
    if pre is None:
        pre = _preimages(f, n - 1)
    idx = [i for i in range(n + 1) if i != k]
    chosen: list[int] = []

    def rec(pos: int):
        if pos == len(idx):
            yield Horn(n, k, tuple(zip(idx, chosen)))
            return
        i = idx[pos]
        cand = pre[int(Y.d(n, i)[y])]
        if meter:
            meter.charge(len(cand))
        if n >= 2:
            for p in range(pos):
                ip = idx[p]
                # d_{ip} x_i = d_{i-1} x_{ip}
                cand = cand[X.d(n - 1, ip)[cand] == X.d(n - 1, i - 1)[chosen[p]]]
                if not len(cand):
                    return
        for c in cand.tolist():
            chosen.append(c)
            yield from rec(pos + 1)
            chosen.pop()

    yield from rec(0)


@dataclass
class FibrationReport:
    checked_horns: int = 0
    failures: list = field(default_factory=list)      # (n, k, y, faces)
    elapsed: float = 0.0
    lifts_checked: int = 0
    crosscheck_failures: list = field(default_factory=list)   # (n, k, y, faces, x)
    traced_steps: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures and not self.crosscheck_failures

    def to_dict(self, include_elapsed: bool = True) -> dict:
        d = {
            "checked_horns": self.checked_horns,
            "failures": [[n, k, y, [list(p) for p in faces]] for n, k, y, faces in self.failures],
            "lifts_checked": self.lifts_checked,
            "crosscheck_failures": [[n, k, y, [list(p) for p in faces], x]
                                    for n, k, y, faces, x in self.crosscheck_failures],
            "traced_steps": self.traced_steps,
        }
        if include_elapsed:
            d["elapsed"] = round(self.elapsed, 6)
        return d

    def to_json(self, include_elapsed: bool = True) -> str:
        return json.dumps(self.to_dict(include_elapsed), sort_keys=True) + "\n"


def _block(f, n, k, crosscheck, trace, meter):
    out = FibrationReport()
    pre = _preimages(f, n - 1)
    size_n = f.source.size(n)
    for y in range(f.target.size(n)):
        for horn in lift_horns_over(f, n, k, y, pre, meter):
            out.checked_horns += 1
            meter.charge(size_n)
            problem = LiftProblem(f, horn, y)
            sols = brute_lift(problem)
            if not sols:
                out.failures.append((n, k, y, horn.faces))
                continue
            if crosscheck:
                res = lift_horn(problem, trace=trace)
                out.lifts_checked += 1
                if res.trace:
                    out.traced_steps += len(res.trace)
                if res.x not in sols:
                    out.crosscheck_failures.append((n, k, y, horn.faces, res.x))
    return out


def verify_fibration(f: SimplicialHom, max_dim: int, budget: Optional[int] = None,
                     workers: int = 1, crosscheck: bool = True, trace: bool = False) -> FibrationReport:
    """Exhaustively enumerate lift problems up to ``max_dim`` and record
    the unliftable ones.  When ``f`` is surjective on levels ``<= max_dim``
    and every such source level has a Maltsev term, the constructive lift
    is also run (with its step invariants when ``trace``) and must land in
    the brute-force solution list.

    Raises BudgetExceeded once more than ``budget`` candidate evaluations
    would be needed.  The report does not depend on ``workers``.
    """
    if not 1 <= max_dim <= f.N:
        raise DimensionOutOfRange(f"max_dim {max_dim} outside 1..{f.N}")
    budget = default_budget() if budget is None else budget
    t0 = time.perf_counter()
    surjective = all(len(np.unique(f.maps[n])) == f.target.size(n) for n in range(max_dim + 1))
    has_terms = all(f.source.levels[n].maltsev_term is not None for n in range(1, max_dim + 1))
    crosscheck = crosscheck and surjective and has_terms
    blocks = [(n, k) for n in range(1, max_dim + 1) for k in range(n + 1)]
    # each block meters itself; their sum is compared with the budget below
    run = lambda b: _block(f, b[0], b[1], crosscheck, trace, _Meter(budget))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    report = FibrationReport()
    for p in parts:
        report.checked_horns += p.checked_horns
        report.failures += p.failures
        report.lifts_checked += p.lifts_checked
        report.crosscheck_failures += p.crosscheck_failures
        report.traced_steps += p.traced_steps
    report.failures.sort()
    report.crosscheck_failures.sort()
    report.elapsed = time.perf_counter() - t0
    return report


def random_lift_problem(f: SimplicialHom, rng: np.random.Generator, n: Optional[int] = None) -> LiftProblem:
    """A lift problem whose horn is the boundary-minus-one of a random
    simplex, lying over that simplex's image."""
    if n is None:
        n = int(rng.integers(1, f.N + 1))
    X = f.source
    w = int(rng.integers(X.size(n)))
    k = int(rng.integers(n + 1))
    return LiftProblem(f, Horn.from_simplex(X, n, k, w), int(f.maps[n][w]))


# ---------------------------------------------------------------- circle test

def kan12_circle_solutions(m: int) -> list[int]:
    """All 2-simplices ``x`` of the free Z/m-module circle with
    ``d_1 x = s_0 *`` and ``d_2 x = sigma``, ascending."""
    if m < 2:
        raise ValueError("m must be at least 2")
    X = circle_free_mod(m, 2)
    star = 1                        # basis vector of level 0
    s0_star = int(X.s(0, 0)[star])
    sigma = m                       # second basis vector of level 1
    ok = (X.d(2, 1) == s0_star) & (X.d(2, 2) == sigma)
    return np.flatnonzero(ok).tolist()


def kan12_circle(m: int) -> Optional[int]:
    sols = kan12_circle_solutions(m)
    return sols[0] if sols else None
