"""Horn filling and horn lifting in simplicial Maltsev algebras.

Given an ``(n, k)``-horn ``x_i`` (``i != k``) in ``X`` lying over ``y`` in
``Y`` along a surjective ``f``, the filler is built from any preimage
``w_{-1}`` of ``y`` by

    w_j = [w_{j-1}, s_j d_j w_{j-1}, s_j x_j]            for j = 0 .. k-1
    w_{n+1} = w_{k-1}
    w_j = [w_{j+1}, s_{j-1} d_j w_{j+1}, s_{j-1} x_j]    for j = n .. k+1

and ``x = w_{k+1}``, where ``[a, b, c]`` is the Maltsev operation of
``X_n``.  Each step keeps ``f(w_j) = y`` and fixes one more face.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .algebra import eval_term
from .errors import (DimensionOutOfRange, HornError, InvariantViolation,
                     MatchingViolation, MissingMaltsevTerm, NoPreimage)
from .simplicial import SimplicialHom, TruncatedSimplicialAlgebra, to_terminal


@dataclass(frozen=True)
class Horn:
    n: int
    k: int
    faces: tuple[tuple[int, int], ...]    # sorted (i, x_i), i != k

    def __post_init__(self):
        if isinstance(self.faces, Mapping):
            object.__setattr__(self, "faces", tuple(sorted(self.faces.items())))
        faces = tuple((int(i), int(x)) for i, x in self.faces)
        object.__setattr__(self, "faces", tuple(sorted(faces)))
        if self.n < 1:
            raise DimensionOutOfRange(f"horn dimension must be >= 1, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise HornError(f"missing index {self.k} outside 0..{self.n}")
        want = [i for i in range(self.n + 1) if i != self.k]
        got = [i for i, _ in self.faces]
        if got != want:
            raise HornError(f"({self.n},{self.k})-horn needs faces {want}, got {got}")

    def __getitem__(self, i: int) -> int:
        for j, x in self.faces:
            if j == i:
                return x
        raise KeyError(i)

    @classmethod
    def of(cls, n: int, k: int, faces: Mapping[int, int]) -> "Horn":
        return cls(n, k, tuple(faces.items()))

    @classmethod
    def from_simplex(cls, X: TruncatedSimplicialAlgebra, n: int, k: int, w: int) -> "Horn":
        return cls(n, k, tuple((i, int(X.d(n, i)[w])) for i in range(n + 1) if i != k))


class LiftProblem(NamedTuple):
    f: SimplicialHom
    horn: Horn
    y: int


class TraceEntry(NamedTuple):
    j: int
    w: int
    phase: str    # "ascending" | "turnaround" | "descending"


class LiftResult(NamedTuple):
    x: int
    trace: Optional[list[TraceEntry]] = None


class MatchingReport(NamedTuple):
    ok: bool
    violation: Optional[tuple[int, int]] = None


def _check_dims(X: TruncatedSimplicialAlgebra, horn: Horn):
    if horn.n > X.N:
        raise DimensionOutOfRange(f"horn dimension {horn.n} exceeds truncation level {X.N}")
    size = X.size(horn.n - 1)
    for i, x in horn.faces:
        if not 0 <= x < size:
            raise HornError(f"face x_{i} = {x} is not an element of level {horn.n - 1}")


def check_matching(X: TruncatedSimplicialAlgebra, horn: Horn) -> MatchingReport:
    """``d_i x_j = d_{j-1} x_i`` for all ``i < j`` other than ``k``;
    reports the lexicographically smallest failing ``(i, j)``."""
    _check_dims(X, horn)
    n, k = horn.n, horn.k
    if n < 2:
        return MatchingReport(True)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if k in (i, j):
                continue
            if X.d(n - 1, i)[horn[j]] != X.d(n - 1, j - 1)[horn[i]]:
                return MatchingReport(False, (i, j))
    return MatchingReport(True)


def _maltsev(X: TruncatedSimplicialAlgebra, n: int) -> Callable[[int, int, int], int]:
    alg = X.levels[n]
    if alg.maltsev_term is None:
        raise MissingMaltsevTerm(f"level {n} ({alg.name!r}) has no Maltsev term")
    t = alg.maltsev_term
    return lambda a, b, c: eval_term(alg, t, [int(a), int(b), int(c)])


def _recursion(X: TruncatedSimplicialAlgebra, horn: Horn, w: int,
               observe: Optional[Callable[[int, int, str], None]] = None) -> int:
    n, k = horn.n, horn.k
    op = _maltsev(X, n)
    d, s = X.d, X.s
    if observe:
        observe(-1, w, "ascending")
    for j in range(k):
        w = op(w, s(n - 1, j)[d(n, j)[w]], s(n - 1, j)[horn[j]])
        if observe:
            observe(j, w, "ascending")
    # w_{n+1} := w_{k-1}
    if observe:
        observe(n + 1, w, "turnaround")
    for j in range(n, k, -1):
        w = op(w, s(n - 1, j - 1)[d(n, j)[w]], s(n - 1, j - 1)[horn[j]])
        if observe:
            observe(j, w, "descending")
    return int(w)


def _tracer(X: TruncatedSimplicialAlgebra, horn: Horn, f: Optional[SimplicialHom], y: Optional[int]):
    """Observer recording the trace and checking the step invariants:
    f(w_j) = y throughout; d_i w_j = x_i for i <= j after an ascending step;
    d_i w_j = x_i for i < k and i >= j after a descending step."""
    n, k = horn.n, horn.k
    entries: list[TraceEntry] = []

    def fixed(w, idx, j, phase):
        for i in idx:
            if X.d(n, i)[w] != horn[i]:
                raise InvariantViolation(
                    f"{phase} step j={j}: d_{i} w = {int(X.d(n, i)[w])}, expected x_{i} = {horn[i]}")

    def observe(j, w, phase):
        entries.append(TraceEntry(j, int(w), phase))
        if f is not None and f.maps[n][w] != y:
            raise InvariantViolation(f"{phase} step j={j}: f(w) = {int(f.maps[n][w])} != y = {y}")
        if phase == "ascending" and j >= 0:
            fixed(w, range(j + 1), j, phase)
        elif phase == "turnaround":
            fixed(w, range(k), j, phase)
        elif phase == "descending":
            fixed(w, [*range(k), *range(j, n + 1)], j, phase)

    return entries, observe


def verify_lift(problem: LiftProblem, x: int) -> bool:
    f, horn, y = problem
    n = horn.n
    X = f.source
    if not 0 <= x < X.size(n):
        return False
    if f.maps[n][x] != y:
        return False
    return all(X.d(n, i)[x] == xi for i, xi in horn.faces)


def lift_horn(problem: LiftProblem, trace: bool = False, start: Optional[int] = None) -> LiftResult:
    """Lift a horn along ``problem.f``.  ``w_{-1}`` is the smallest element
    of the fiber over ``y`` unless ``start`` supplies one.  With ``trace``
    every step is recorded and checked."""
    f, horn, y = problem
    X, Y = f.source, f.target
    n = horn.n
    _check_dims(X, horn)
    if not 0 <= y < Y.size(n):
        raise HornError(f"y = {y} is not an element of level {n}")
    rep = check_matching(X, horn)
    if not rep.ok:
        raise MatchingViolation(f"horn faces do not match at (i,j) = {rep.violation}")
    for i, xi in horn.faces:
        if Y.d(n, i)[y] != f.maps[n - 1][xi]:
            raise MatchingViolation(f"d_{i} y = {int(Y.d(n, i)[y])} but f(x_{i}) = {int(f.maps[n - 1][xi])}")
    if start is None:
        fiber = np.flatnonzero(f.maps[n] == y)
        if not fiber.size:
            raise NoPreimage(f"no element of level {n} maps to y = {y}")
        start = int(fiber[0])
    elif f.maps[n][start] != y:
        raise NoPreimage(f"start element {start} does not lie over y = {y}")
    entries, observe = _tracer(X, horn, f, y) if trace else (None, None)
    x = _recursion(X, horn, start, observe)
    if not verify_lift(problem, x):
        raise InvariantViolation(f"lift {x} fails the lifting conditions")
    return LiftResult(x, entries)


def fill_start(X: TruncatedSimplicialAlgebra, horn: Horn) -> int:
    """Default ``w_{-1}`` for filling: ``s_0`` of the lowest available face."""
    return int(X.s(horn.n - 1, 0)[horn.faces[0][1]])


def fill_horn(X: TruncatedSimplicialAlgebra, horn: Horn, trace: bool = False):
    """A filler ``x`` with ``d_i x = x_i`` for ``i != k``.  Returns the
    element, or a :class:`LiftResult` with the trace when ``trace`` is set."""
    _check_dims(X, horn)
    rep = check_matching(X, horn)
    if not rep.ok:
        raise MatchingViolation(f"horn faces do not match at (i,j) = {rep.violation}")
    entries, observe = _tracer(X, horn, None, None) if trace else (None, None)
    x = _recursion(X, horn, fill_start(X, horn), observe)
    if any(X.d(horn.n, i)[x] != xi for i, xi in horn.faces):
        raise InvariantViolation(f"filler {x} has the wrong faces")
    return LiftResult(x, entries) if trace else x


def fill_via_terminal(X: TruncatedSimplicialAlgebra, horn: Horn) -> int:
    """Filling as lifting against the terminal simplicial algebra."""
    return lift_horn(LiftProblem(to_terminal(X), horn, 0), start=fill_start(X, horn)).x
