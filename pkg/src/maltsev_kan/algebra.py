"""Finite algebras given by operation tables, term evaluation, and the
Maltsev and homomorphism checks.

A table for an ``r``-ary operation on ``{0..m-1}`` is a flat array of
length ``m**r``; the entry for ``(a_1, ..., a_r)`` sits at
``a_1*m**(r-1) + ... + a_r`` (row-major, first argument most significant).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from ._kernels import kernels
from .errors import (ArityMismatch, MaltsevAxiomError, SignatureMismatch,
                     TableShapeError, UnknownOperation, VarOutOfRange)
from .terms import App, Term, Var, parse_term


def carrier_dtype(size: int):
    return np.min_scalar_type(max(size - 1, 0))


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        ops = tuple((str(n), int(a)) for n, a in self.ops)
        object.__setattr__(self, "ops", ops)
        seen = set()
        for name, arity in ops:
            if not name:
                raise ValueError("operation names must be nonempty")
            if name in seen:
                raise ValueError(f"duplicate operation name {name!r}")
            if arity < 0:
                raise ValueError(f"negative arity for {name!r}")
            seen.add(name)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.ops]

    def arity(self, name: str) -> int:
        for n, a in self.ops:
            if n == name:
                return a
        raise UnknownOperation(f"unknown operation {name!r}")


class FiniteAlgebra:
    """Carrier ``{0..size-1}`` with one table per signature operation.

    Tables are frozen (read-only numpy arrays).  If ``maltsev_term`` is
    given it is checked against the Maltsev identities on construction.
    """

    __slots__ = ("name", "size", "signature", "tables", "maltsev_term")

    def __init__(self, name: str, size: int, signature, tables: Mapping[str, Sequence[int]],
                 maltsev_term: Optional[Term | str] = None):
        if size < 1:
            raise TableShapeError(f"algebra {name!r}: carrier size must be positive, got {size}")
        if not isinstance(signature, Signature):
            signature = Signature(tuple(signature))
        extra = set(tables) - set(signature.names)
        if extra:
            raise TableShapeError(f"algebra {name!r}: tables for undeclared operations {sorted(extra)}")
        dt = carrier_dtype(size)
        frozen = {}
        for op, arity in signature:
            if op not in tables:
                raise TableShapeError(f"algebra {name!r}: missing table for {op!r}")
            raw = np.asarray(tables[op])
            if raw.ndim != 1 or raw.shape[0] != size ** arity:
                raise TableShapeError(
                    f"algebra {name!r}: table {op!r} has shape {raw.shape}, expected ({size ** arity},)")
            if raw.size:
                if raw.dtype.kind not in "iu":
                    raise TableShapeError(f"algebra {name!r}: table {op!r} is not integer-valued")
                bad = np.flatnonzero((raw < 0) | (raw >= size))
                if bad.size:
                    i = int(bad[0])
                    raise TableShapeError(
                        f"algebra {name!r}: table {op!r} entry at flat index {i} is {int(raw[i])}, "
                        f"outside carrier 0..{size - 1}")
            arr = np.array(raw, dtype=dt)
            arr.setflags(write=False)
            frozen[op] = arr
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "size", int(size))
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "tables", frozen)
        if isinstance(maltsev_term, str):
            maltsev_term = parse_term(maltsev_term)
        object.__setattr__(self, "maltsev_term", maltsev_term)
        if maltsev_term is not None:
            rep = check_maltsev_axioms(self, maltsev_term)
            if not rep.holds:
                a, b, ax = rep.counterexample
                raise MaltsevAxiomError(
                    f"algebra {name!r}: maltsev_term {maltsev_term} fails axiom {ax} at (a,b)=({a},{b})")

    def __setattr__(self, key, value):
        raise AttributeError("FiniteAlgebra is immutable")

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (self.name == other.name and self.size == other.size
                and self.signature == other.signature
                and self.maltsev_term == other.maltsev_term
                and all(np.array_equal(self.tables[op], other.tables[op]) for op in self.tables))

    def __hash__(self):
        return hash((self.name, self.size, self.signature))

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, size={self.size}, ops={self.signature.names})"

    def with_maltsev_term(self, t: Optional[Term]) -> "FiniteAlgebra":
        return FiniteAlgebra(self.name, self.size, self.signature, self.tables, t)

    def apply(self, op: str, *args: int) -> int:
        table = self.tables.get(op)
        if table is None:
            raise UnknownOperation(f"unknown operation {op!r}")
        if len(args) != self.signature.arity(op):
            raise ArityMismatch(f"{op!r} takes {self.signature.arity(op)} arguments, got {len(args)}")
        idx = 0
        for a in args:
            idx = idx * self.size + int(a)
        return int(table[idx])


# ---------------------------------------------------------------- evaluation

def _check_app(alg: FiniteAlgebra, t: App):
    if t.op not in alg.tables:
        raise UnknownOperation(f"operation {t.op!r} not in signature of {alg.name!r}")
    arity = alg.signature.arity(t.op)
    if len(t.args) != arity:
        raise ArityMismatch(f"{t.op!r} has arity {arity}, applied to {len(t.args)} arguments")


def eval_term(alg: FiniteAlgebra, t: Term, env: Sequence[int]) -> int:
    if isinstance(t, Var):
        if t.index >= len(env):
            raise VarOutOfRange(f"v{t.index} with only {len(env)} values bound")
        return env[t.index]
    _check_app(alg, t)
    idx = 0
    for a in t.args:
        idx = idx * alg.size + int(eval_term(alg, a, env))
    return int(alg.tables[t.op][idx])


def eval_term_vec(alg: FiniteAlgebra, t: Term, env: Sequence[np.ndarray]) -> np.ndarray:
    """Pointwise evaluation over equal-length arrays of carrier elements."""
    if isinstance(t, Var):
        if t.index >= len(env):
            raise VarOutOfRange(f"v{t.index} with only {len(env)} values bound")
        return np.asarray(env[t.index], dtype=np.int64)
    _check_app(alg, t)
    if not t.args:
        n = len(env[0]) if env else 1
        return np.full(n, alg.tables[t.op][0], dtype=np.int64)
    idx = np.zeros(1, dtype=np.int64)
    for a in t.args:
        idx = idx * alg.size + eval_term_vec(alg, a, env)
    return alg.tables[t.op][idx].astype(np.int64)


# ---------------------------------------------------------------- checks

class MaltsevReport(NamedTuple):
    holds: bool
    counterexample: Optional[tuple[int, int, int]] = None   # (a, b, axiom 1 or 2)


def check_maltsev_axioms(alg: FiniteAlgebra, t: Term) -> MaltsevReport:
    """Axiom 1 is ``t(a,a,b) = b``, axiom 2 is ``t(a,b,b) = a``.  A failure
    reports the lexicographically smallest ``(a, b)``; when both axioms
    fail there, axiom 1 is named."""
    m = alg.size
    a, b = np.divmod(np.arange(m * m, dtype=np.int64), m)
    bad1 = eval_term_vec(alg, t, [a, a, b]) != b
    bad2 = eval_term_vec(alg, t, [a, b, b]) != a
    bad = bad1 | bad2
    if not bad.any():
        return MaltsevReport(True)
    i = int(np.argmax(bad))
    return MaltsevReport(False, (int(a[i]), int(b[i]), 1 if bad1[i] else 2))


class HomReport(NamedTuple):
    holds: bool
    counterexample: Optional[tuple[str, tuple[int, ...]]] = None


def _decode(flat: int, base: int, arity: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        flat, r = divmod(flat, base)
        out.append(r)
    return tuple(reversed(out))


def is_homomorphism(src: FiniteAlgebra, dst: FiniteAlgebra, hmap) -> HomReport:
    if src.signature != dst.signature:
        raise SignatureMismatch(f"{src.name!r} and {dst.name!r} have different signatures")
    hmap = np.asarray(hmap, dtype=np.int64)
    if hmap.shape != (src.size,):
        raise TableShapeError(f"map has length {hmap.shape}, expected {src.size}")
    if hmap.size and (hmap.min() < 0 or hmap.max() >= dst.size):
        raise TableShapeError(f"map values must lie in 0..{dst.size - 1}")
    for op, arity in src.signature:
        t = kernels.hom_failure(hmap, src.tables[op], dst.tables[op], src.size, dst.size, arity)
        if t >= 0:
            return HomReport(False, (op, _decode(t, src.size, arity)))
    return HomReport(True)


# ---------------------------------------------------------------- standard algebras

GROUP_SIG = Signature((("+", 2), ("neg", 1), ("0", 0)))
GROUP_MALTSEV = parse_term("(+ (+ v0 (neg v1)) v2)")


def zmod_power(m: int, n: int, name: Optional[str] = None) -> FiniteAlgebra:
    """(Z/m)^n with componentwise ``+``, ``neg`` and ``0``.  Tuples are
    encoded little-endian in base m: ``(g_1..g_n) -> sum g_t m^(t-1)``."""
    size = m ** n
    dt = carrier_dtype(size)
    digits = [(np.arange(size, dtype=np.int64) // m ** t) % m for t in range(n)]
    add = np.zeros(size * size, dtype=np.int64)
    neg = np.zeros(size, dtype=np.int64)
    for t, d in enumerate(digits):
        add += (((d[:, None] + d[None, :]) % m) * m ** t).ravel()
        neg += ((-d) % m) * m ** t
    return FiniteAlgebra(name or f"Z/{m}^{n}", size, GROUP_SIG,
                         {"+": add.astype(dt), "neg": neg.astype(dt), "0": [0]},
                         GROUP_MALTSEV)


def cyclic_group(m: int) -> FiniteAlgebra:
    return zmod_power(m, 1, f"Z/{m}")


def zmod_sub(m: int) -> FiniteAlgebra:
    """Z/m with binary subtraction only."""
    a, b = np.divmod(np.arange(m * m), m)
    return FiniteAlgebra(f"Z/{m} (-)", m, Signature((("-", 2),)), {"-": (a - b) % m})


def zmod_add(m: int) -> FiniteAlgebra:
    """Z/m with ``+`` and the constant ``0``."""
    a, b = np.divmod(np.arange(m * m), m)
    return FiniteAlgebra(f"Z/{m} (+,0)", m, Signature((("+", 2), ("0", 0))),
                         {"+": (a + b) % m, "0": [0]})


def semilattice() -> FiniteAlgebra:
    """({0,1}, meet)."""
    return FiniteAlgebra("meet semilattice", 2, Signature((("meet", 2),)), {"meet": [0, 0, 0, 1]})


def heyting_chain(k: int = 3) -> FiniteAlgebra:
    """The chain ``0 < 1 < ... < k-1`` as a Heyting algebra with meet, join,
    implication and the constants ``bot``, ``top``."""
    a, b = np.divmod(np.arange(k * k), k)
    imp = np.where(a <= b, k - 1, b)
    sig = Signature((("meet", 2), ("join", 2), ("imp", 2), ("bot", 0), ("top", 0)))
    return FiniteAlgebra(f"Heyting chain {k}", k, sig, {
        "meet": np.minimum(a, b), "join": np.maximum(a, b), "imp": imp,
        "bot": [0], "top": [k - 1]})


def trivial(signature, name="trivial") -> FiniteAlgebra:
    if not isinstance(signature, Signature):
        signature = Signature(tuple(signature))
    return FiniteAlgebra(name, 1, signature, {op: [0] for op, _ in signature})
