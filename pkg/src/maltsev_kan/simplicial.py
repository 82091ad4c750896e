"""Truncated simplicial algebras and homomorphisms between them.

Level ``n`` is a :class:`FiniteAlgebra`; elements are carrier indices and
face/degeneracy maps are integer index arrays.  ``X.d(n, i)`` maps
``X_n -> X_{n-1}`` and ``X.s(n, i)`` maps ``X_n -> X_{n+1}``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .algebra import (FiniteAlgebra, Signature, carrier_dtype, is_homomorphism,
                      trivial, zmod_power)
from .errors import ShapeError


class Violation(NamedTuple):
    law: str
    n: int
    i: int
    j: int
    element: int


class ValidationReport(NamedTuple):
    ok: bool
    violations: list[Violation]


def _frozen(a, dtype=None):
    arr = np.array(a, dtype=dtype if dtype is not None else np.asarray(a).dtype)
    arr.setflags(write=False)
    return arr


class TruncatedSimplicialAlgebra:
    """Levels ``X_0..X_N``.  ``faces[n-1][i]`` is ``d_i`` on ``X_n``
    (``1 <= n <= N``); ``degeneracies[n][i]`` is ``s_i`` on ``X_n``
    (``0 <= n <= N-1``).  Shapes are checked here, laws by :func:`validate`."""

    def __init__(self, levels: Sequence[FiniteAlgebra], faces, degeneracies):
        levels = tuple(levels)
        N = len(levels) - 1
        if N < 1:
            raise ShapeError("need at least levels 0 and 1")
        sig = levels[0].signature
        for n, lev in enumerate(levels):
            if lev.signature != sig:
                raise ShapeError(f"level {n} signature differs from level 0")
        if len(faces) != N or len(degeneracies) != N:
            raise ShapeError(f"expected {N} face and {N} degeneracy groups, "
                             f"got {len(faces)} and {len(degeneracies)}")
        fz, dg = [], []
        for n in range(1, N + 1):
            group = faces[n - 1]
            if len(group) != n + 1:
                raise ShapeError(f"level {n} needs {n + 1} face maps, got {len(group)}")
            fz.append(tuple(self._check_map(group[i], levels[n], levels[n - 1], f"d_{i} on level {n}")
                            for i in range(n + 1)))
        for n in range(N):
            group = degeneracies[n]
            if len(group) != n + 1:
                raise ShapeError(f"level {n} needs {n + 1} degeneracy maps, got {len(group)}")
            dg.append(tuple(self._check_map(group[i], levels[n], levels[n + 1], f"s_{i} on level {n}")
                            for i in range(n + 1)))
        self.N = N
        self.levels = levels
        self.faces = tuple(fz)
        self.degeneracies = tuple(dg)

    @staticmethod
    def _check_map(arr, src, dst, what):
        a = np.asarray(arr)
        if a.ndim != 1 or a.shape[0] != src.size:
            raise ShapeError(f"{what}: length {a.shape}, expected {src.size}")
        if a.size and (a.dtype.kind not in "iu" or a.min() < 0 or a.max() >= dst.size):
            raise ShapeError(f"{what}: entries must lie in 0..{dst.size - 1}")
        return _frozen(a, carrier_dtype(dst.size))

    @property
    def signature(self) -> Signature:
        return self.levels[0].signature

    def size(self, n: int) -> int:
        return self.levels[n].size

    def d(self, n: int, i: int) -> np.ndarray:
        return self.faces[n - 1][i]

    def s(self, n: int, i: int) -> np.ndarray:
        return self.degeneracies[n][i]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSimplicialAlgebra):
            return NotImplemented
        return (self.levels == other.levels
                and all(np.array_equal(a, b) for ga, gb in zip(self.faces, other.faces)
                        for a, b in zip(ga, gb))
                and all(np.array_equal(a, b) for ga, gb in zip(self.degeneracies, other.degeneracies)
                        for a, b in zip(ga, gb)))

    def __repr__(self):
        return f"TruncatedSimplicialAlgebra(N={self.N}, sizes={[l.size for l in self.levels]})"

    def replace_map(self, kind: str, n: int, i: int, arr) -> "TruncatedSimplicialAlgebra":
        """Copy with one face (``kind='d'``) or degeneracy (``'s'``) swapped."""
        faces = [list(g) for g in self.faces]
        degs = [list(g) for g in self.degeneracies]
        if kind == "d":
            faces[n - 1][i] = arr
        else:
            degs[n][i] = arr
        return TruncatedSimplicialAlgebra(self.levels, faces, degs)


def _first_diff(lhs: np.ndarray, rhs: np.ndarray) -> int:
    bad = lhs != rhs
    return int(np.argmax(bad)) if bad.any() else -1


def _identity_checks(X: TruncatedSimplicialAlgebra):
    """Yield ``(law, n, i, j, thunk)``; each thunk returns the first element
    of ``X_n`` where the law fails, or -1."""
    N, d, s = X.N, X.d, X.s
    for n in range(2, N + 1):
        for j in range(n + 1):
            for i in range(j):
                yield ("d_i d_j = d_{j-1} d_i", n, i, j,
                       lambda n=n, i=i, j=j: _first_diff(d(n - 1, i)[d(n, j)], d(n - 1, j - 1)[d(n, i)]))
    for n in range(N):
        ident = np.arange(X.size(n))
        for j in range(n + 1):
            yield ("d_j s_j = id", n, j, j,
                   lambda n=n, j=j, ident=ident: _first_diff(d(n + 1, j)[s(n, j)], ident))
            yield ("d_{j+1} s_j = id", n, j + 1, j,
                   lambda n=n, j=j, ident=ident: _first_diff(d(n + 1, j + 1)[s(n, j)], ident))
            for i in range(j):
                yield ("d_i s_j = s_{j-1} d_i", n, i, j,
                       lambda n=n, i=i, j=j: _first_diff(d(n + 1, i)[s(n, j)], s(n - 1, j - 1)[d(n, i)]))
            for i in range(j + 2, n + 2):
                yield ("d_i s_j = s_j d_{i-1}", n, i, j,
                       lambda n=n, i=i, j=j: _first_diff(d(n + 1, i)[s(n, j)], s(n - 1, j)[d(n, i - 1)]))
    for n in range(N - 1):
        for j in range(n + 1):
            for i in range(j + 1):
                yield ("s_i s_j = s_{j+1} s_i", n, i, j,
                       lambda n=n, i=i, j=j: _first_diff(s(n + 1, i)[s(n, j)], s(n + 1, j + 1)[s(n, i)]))


def _hom_checks(X: TruncatedSimplicialAlgebra):
    for n in range(1, X.N + 1):
        for i in range(n + 1):
            yield ("d_i homomorphism", n, i, -1,
                   lambda n=n, i=i: _hom_elem(X.levels[n], X.levels[n - 1], X.d(n, i)))
    for n in range(X.N):
        for i in range(n + 1):
            yield ("s_i homomorphism", n, i, -1,
                   lambda n=n, i=i: _hom_elem(X.levels[n], X.levels[n + 1], X.s(n, i)))


def _hom_elem(src, dst, hmap) -> int:
    """First element of ``src`` appearing in a failing argument tuple
    (the smallest failing tuple's first entry; 0 for a constant)."""
    rep = is_homomorphism(src, dst, hmap)
    if rep.holds:
        return -1
    _, args = rep.counterexample
    return args[0] if args else 0


def _run_checks(checks, workers: int) -> list[Violation]:
    checks = list(checks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda c: c[4](), checks))
    else:
        results = [c[4]() for c in checks]
    out = [Violation(law, n, i, j, e) for (law, n, i, j, _), e in zip(checks, results) if e >= 0]
    return sorted(out)


def validate(X: TruncatedSimplicialAlgebra, workers: int = 1) -> ValidationReport:
    """Check every face/degeneracy is a homomorphism and every simplicial
    identity that fits under the truncation.  One violation is reported
    per failing (law, n, i, j), at its smallest element."""
    v = _run_checks([*_hom_checks(X), *_identity_checks(X)], workers)
    return ValidationReport(not v, v)


# ---------------------------------------------------------------- homs

class SimplicialHom:
    """Levelwise maps ``f_n: X_n -> Y_n``."""

    def __init__(self, source: TruncatedSimplicialAlgebra, target: TruncatedSimplicialAlgebra, maps):
        if source.N != target.N:
            raise ShapeError(f"truncation levels differ: {source.N} vs {target.N}")
        if source.signature != target.signature:
            raise ShapeError("source and target signatures differ")
        if len(maps) != source.N + 1:
            raise ShapeError(f"need {source.N + 1} level maps, got {len(maps)}")
        self.source = source
        self.target = target
        self.maps = tuple(TruncatedSimplicialAlgebra._check_map(
            maps[n], source.levels[n], target.levels[n], f"f_{n}") for n in range(source.N + 1))

    @property
    def N(self):
        return self.source.N

    def __call__(self, n: int, x):
        return self.maps[n][x]

    def __repr__(self):
        return f"SimplicialHom({self.source!r} -> {self.target!r})"


def validate_hom(f: SimplicialHom, workers: int = 1) -> ValidationReport:
    X, Y = f.source, f.target
    checks = []
    for n in range(f.N + 1):
        checks.append(("f_n homomorphism", n, -1, -1,
                       lambda n=n: _hom_elem(X.levels[n], Y.levels[n], f.maps[n])))
    for n in range(1, f.N + 1):
        for i in range(n + 1):
            checks.append(("f d_i = d_i f", n, i, -1,
                           lambda n=n, i=i: _first_diff(f.maps[n - 1][X.d(n, i)], Y.d(n, i)[f.maps[n]])))
    for n in range(f.N):
        for i in range(n + 1):
            checks.append(("f s_i = s_i f", n, i, -1,
                           lambda n=n, i=i: _first_diff(f.maps[n + 1][X.s(n, i)], Y.s(n, i)[f.maps[n]])))
    v = _run_checks(checks, workers)
    return ValidationReport(not v, v)


def is_levelwise_surjective(f: SimplicialHom) -> bool:
    return all(len(np.unique(f.maps[n])) == f.target.size(n) for n in range(f.N + 1))


def compose(g: SimplicialHom, f: SimplicialHom) -> SimplicialHom:
    """``g after f``."""
    if f.target is not g.source and f.target != g.source:
        raise ShapeError("composition: target of f is not the source of g")
    return SimplicialHom(f.source, g.target, [g.maps[n][f.maps[n]] for n in range(f.N + 1)])


def identity(X: TruncatedSimplicialAlgebra) -> SimplicialHom:
    return SimplicialHom(X, X, [np.arange(X.size(n)) for n in range(X.N + 1)])


# ---------------------------------------------------------------- fixtures

def constant(alg: FiniteAlgebra, N: int) -> TruncatedSimplicialAlgebra:
    ident = np.arange(alg.size)
    return TruncatedSimplicialAlgebra(
        [alg] * (N + 1),
        [[ident] * (n + 1) for n in range(1, N + 1)],
        [[ident] * (n + 1) for n in range(N)])


def terminal(signature, N: int) -> TruncatedSimplicialAlgebra:
    return constant(trivial(signature, "point"), N)


def to_terminal(X: TruncatedSimplicialAlgebra) -> SimplicialHom:
    return SimplicialHom(X, terminal(X.signature, X.N),
                         [np.zeros(X.size(n), dtype=np.int64) for n in range(X.N + 1)])


def _digits(m: int, ncoords: int) -> np.ndarray:
    size = m ** ncoords
    x = np.arange(size, dtype=np.int64)
    return np.stack([(x // m ** t) % m for t in range(ncoords)], axis=0) if ncoords else np.zeros((0, size), np.int64)


def _linear_map(m: int, src_coords: int, dst_coords: int,
                basis_image: Sequence[Optional[int]]) -> np.ndarray:
    """Z/m-linear map sending source basis vector ``t`` to target basis
    vector ``basis_image[t]`` (or to zero when it is None).  Vectors are
    base-m little-endian integers."""
    dig = _digits(m, src_coords)
    out = np.zeros((dst_coords, dig.shape[1]), dtype=np.int64)
    for t, img in enumerate(basis_image):
        if img is not None:
            out[img] += dig[t]
    out %= m
    weights = m ** np.arange(dst_coords, dtype=np.int64)
    return (out * weights[:, None]).sum(axis=0) if dst_coords else np.zeros(dig.shape[1], np.int64)


def nerve_face_image(n: int, i: int) -> list[Optional[int]]:
    """Where ``d_i`` on level ``n`` of the nerve sends tuple position
    ``t`` (0-based), or None when the entry is dropped."""
    if i == 0:
        return [None] + list(range(n - 1))
    if i == n:
        return list(range(n - 1)) + [None]
    return [t if t < i else t - 1 for t in range(n)]


def nerve_degeneracy_image(n: int, i: int) -> list[int]:
    """``s_i`` inserts a zero after position ``i`` (1-based)."""
    return [t if t < i else t + 1 for t in range(n)]


def nerve_abelian(m: int, N: int) -> TruncatedSimplicialAlgebra:
    """Nerve of Z/m: level n is (Z/m)^n, encoded ``sum g_t m^(t-1)``."""
    levels = [zmod_power(m, n, f"nerve Z/{m} level {n}") for n in range(N + 1)]
    faces = [[_linear_map(m, n, n - 1, nerve_face_image(n, i)) for i in range(n + 1)]
             for n in range(1, N + 1)]
    degs = [[_linear_map(m, n, n + 1, nerve_degeneracy_image(n, i)) for i in range(n + 1)]
            for n in range(N)]
    return TruncatedSimplicialAlgebra(levels, faces, degs)


@dataclass(frozen=True)
class CircleElement:
    """A simplex of the circle ``Delta^1 / boundary``.  ``jump = 0`` is the
    basepoint in every dimension; ``jump = j >= 1`` is the map
    ``[n] -> [1]`` taking ``0..j-1`` to 0 and ``j..n`` to 1."""
    dimension: int
    jump: int

    def __post_init__(self):
        if not 0 <= self.jump <= self.dimension:
            raise ValueError(f"jump {self.jump} outside 0..{self.dimension}")

    def face(self, i: int) -> "CircleElement":
        n, j = self.dimension, self.jump
        r = j - 1 if i < j else j
        if r <= 0 or r >= n:
            r = 0
        return CircleElement(n - 1, r)

    def degeneracy(self, i: int) -> "CircleElement":
        j = self.jump
        return CircleElement(self.dimension + 1, j + 1 if 0 < j and i < j else j)

    @property
    def is_basepoint(self) -> bool:
        return self.jump == 0


def circle_basis(n: int) -> list[CircleElement]:
    return [CircleElement(n, j) for j in range(n + 1)]


def circle_free_mod(m: int, N: int) -> TruncatedSimplicialAlgebra:
    """Free Z/m-module on the circle, levelwise.  Level n has basis
    ``S^1_n`` in jump order, so level 2 is ``(s1 s0 *, s1 sigma, s0 sigma)``."""
    levels = [zmod_power(m, n + 1, f"circle Z/{m} level {n}") for n in range(N + 1)]
    faces = [[_linear_map(m, n + 1, n, [e.face(i).jump for e in circle_basis(n)]) for i in range(n + 1)]
             for n in range(1, N + 1)]
    degs = [[_linear_map(m, n + 1, n + 2, [e.degeneracy(i).jump for e in circle_basis(n)])
             for i in range(n + 1)] for n in range(N)]
    return TruncatedSimplicialAlgebra(levels, faces, degs)


def _digitwise_hom(src: TruncatedSimplicialAlgebra, dst: TruncatedSimplicialAlgebra,
                   m_src: int, m_dst: int, coords: Callable[[int], int], fn) -> SimplicialHom:
    maps = []
    for n in range(src.N + 1):
        k = coords(n)
        dig = fn(_digits(m_src, k)) % m_dst
        weights = m_dst ** np.arange(k, dtype=np.int64)
        maps.append((dig * weights[:, None]).sum(axis=0) if k else np.zeros(1, np.int64))
    return SimplicialHom(src, dst, maps)


def reduction_hom(m: int, q: int, N: int) -> SimplicialHom:
    """Componentwise reduction nerve(Z/m) -> nerve(Z/q), for q dividing m."""
    if m % q:
        raise ValueError(f"{q} does not divide {m}")
    return _digitwise_hom(nerve_abelian(m, N), nerve_abelian(q, N), m, q, lambda n: n, lambda g: g)


def multiply_hom(a: int, b: int, N: int) -> SimplicialHom:
    """Componentwise ``g -> (b/a) g`` from nerve(Z/a) to nerve(Z/b)."""
    if b % a:
        raise ValueError(f"{a} does not divide {b}")
    return _digitwise_hom(nerve_abelian(a, N), nerve_abelian(b, N), a, b, lambda n: n,
                          lambda g: g * (b // a))
