"""Maltsev term detection by subalgebra closure.

A ternary term is Maltsev exactly when its term function, restricted to
the probe domain ``D = {(a,a,b)} u {(a,b,b)}``, equals the target
``(a,a,b) -> b, (a,b,b) -> a``.  Term functions restricted to ``D`` form the
subalgebra of ``A^D`` generated by the three restricted projections, so the
search is a breadth-first closure of that subalgebra, deduplicated on
values.  Generation ``g`` holds exactly the functions of minimal term
depth ``g``; the first hit is therefore a minimal-depth witness.
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from ._kernels import kernels
from .algebra import FiniteAlgebra, carrier_dtype, eval_term_vec
from .errors import ResourceLimit
from .terms import App, Term, Var

log = logging.getLogger(__name__)

DEFAULT_MAX_CLOSURE = 5_000_000
_CHUNK = 1 << 20


def probe_domain(m: int) -> np.ndarray:
    """Rows of ``D``: first every ``(a,a,b)`` in lexicographic ``(a,b)``
    order, then every ``(a,b,b)`` with ``a != b``.  Shape ``(2m^2-m, 3)``."""
    a, b = np.divmod(np.arange(m * m), m)
    first = np.stack([a, a, b], axis=1)
    off = a != b
    second = np.stack([a[off], b[off], b[off]], axis=1)
    return np.concatenate([first, second]).astype(np.int64)


def target_values(m: int) -> np.ndarray:
    dom = probe_domain(m)
    aab = dom[: m * m]
    abb = dom[m * m:]
    # both rules must agree on the shared tuples (a,a,a)
    diag = aab[aab[:, 0] == aab[:, 2]]
    assert np.array_equal(diag[:, 2], diag[:, 0])
    return np.concatenate([aab[:, 2], abb[:, 0]])


class IndexedFunction(NamedTuple):
    values: np.ndarray
    provenance: Term


class ClosureStats(NamedTuple):
    closure_size: int
    generations: int
    found: bool


def _packable(m: int, length: int) -> bool:
    return length * math.log2(max(m, 2)) < 63


class Closure:
    """Breadth-first closure state.  Members are value rows over ``D``;
    each remembers how it was built: a projection index, or an operation
    applied to a flat tuple of earlier member indices.

    Rows are deduplicated through packed base-m integer keys when
    ``|D| log2 m < 63`` (the fused kernel path), and through their raw
    bytes otherwise."""

    def __init__(self, alg: FiniteAlgebra, max_closure: int = DEFAULT_MAX_CLOSURE):
        self.alg = alg
        self.max_closure = max_closure
        m = alg.size
        self.domain = probe_domain(m)
        self.target = target_values(m).astype(carrier_dtype(m))
        self.length = len(self.domain)
        self.packed = _packable(m, self.length)
        if self.packed:
            self.weights = np.int64(m) ** np.arange(self.length, dtype=np.int64)
            self.target_key = int(self.target.astype(np.int64) @ self.weights)
            self.keyset = kernels.KeySet()
        else:
            self.seen: set[bytes] = set()
        self._blocks: list[np.ndarray] = []
        self._members: Optional[np.ndarray] = None
        self.prov_op: list[int] = []       # -1 for a projection
        self.prov_arg: list[int] = []      # projection index or flat tuple index
        self.prov_base: list[int] = []     # member count the tuple was drawn from
        self.gen_start = [0]
        self.generations = 0
        self.found: Optional[int] = None
        self.complete = False
        for p in range(3):
            self._offer(self.domain[:, p].astype(self.target.dtype), -1, p, 0)

    @property
    def size(self) -> int:
        return len(self.prov_op)

    @property
    def members(self) -> np.ndarray:
        if self._members is None or len(self._members) != self.size:
            self._members = (np.concatenate(self._blocks) if self._blocks
                             else np.empty((0, self.length), self.target.dtype))
            self._blocks = [self._members]
        return self._members

    def _offer(self, row, op_idx, arg, base):
        """Add a single row if it is new (projections and constants)."""
        if self.packed:
            key = int(row.astype(np.int64) @ self.weights)
            if not self.keyset.add_new(key):
                return
        else:
            b = row.tobytes()
            if b in self.seen:
                return
            self.seen.add(b)
        self._append(row[None, :], [op_idx], [arg], base)
        if self.found is None and np.array_equal(row, self.target):
            self.found = self.size - 1

    def _append(self, rows, ops, args, base):
        self._blocks.append(np.ascontiguousarray(rows))
        self.prov_op.extend(ops)
        self.prov_arg.extend(int(a) for a in args)
        self.prov_base.extend([base] * len(ops))
        if self.size > self.max_closure:
            raise ResourceLimit(
                f"closure of {self.alg.name!r} exceeded {self.max_closure} members "
                f"in generation {self.generations}")

    def step(self) -> bool:
        """Run one generation.  Returns False once the closure has
        stabilized or the target has been reached."""
        if self.found is not None or self.complete:
            return False
        self.generations += 1
        S = self.size
        g_start = self.gen_start[-1]
        members = self.members
        for op_idx, (op, arity) in enumerate(self.alg.signature):
            table = self.alg.tables[op]
            if arity == 0:
                if self.generations == 1:
                    self._offer(np.full(self.length, table[0], dtype=self.target.dtype), op_idx, 0, S)
                    if self.found is not None:
                        break
                continue
            total = S ** arity
            t = g_start if arity == 1 else 0
            while t < total and self.found is None:
                if self.packed:
                    room = self.max_closure - self.size + 1
                    vals, idx, t, hit = kernels.expand_new(
                        members, table, self.alg.size, arity, g_start, t, total,
                        self.weights, self.keyset, self.target_key, min(_CHUNK, room))
                else:
                    hi = min(total, t + _CHUNK)
                    vals, idx = kernels.expand(members, table, self.alg.size, arity, g_start, t, hi)
                    vals, idx, hit = self._bytes_new(vals, idx)
                    t = hi
                if len(vals):
                    self._append(vals, [op_idx] * len(vals), idx, S)
                if hit:
                    self.found = self.size - 1
            if self.found is not None:
                break
        self.gen_start.append(S)
        log.debug("generation %d: %d -> %d members", self.generations, S, self.size)
        if self.found is not None:
            return False
        if self.size == S:
            self.complete = True
            return False
        return True

    def _bytes_new(self, vals, idx):
        keep = []
        hit = False
        target = self.target.tobytes()
        for r in range(len(vals)):
            b = vals[r].tobytes()
            if b not in self.seen:
                self.seen.add(b)
                keep.append(r)
                if b == target:
                    hit = True
                    break
        keep = np.asarray(keep, dtype=np.int64)
        return vals[keep], idx[keep], hit

    def run(self, max_generations: Optional[int] = None) -> "Closure":
        """Step until done, or until ``max_generations`` rounds have run."""
        while max_generations is None or self.generations < max_generations:
            if not self.step():
                break
        return self

    def term(self, i: int) -> Term:
        memo: dict[int, Term] = {}

        def build(j: int) -> Term:
            if j in memo:
                return memo[j]
            op_idx = self.prov_op[j]
            if op_idx < 0:
                t: Term = Var(self.prov_arg[j])
            else:
                op, arity = self.alg.signature.ops[op_idx]
                flat, base = self.prov_arg[j], self.prov_base[j]
                digits = []
                for _ in range(arity):
                    flat, r = divmod(flat, base)
                    digits.append(r)
                t = App(op, tuple(build(d) for d in reversed(digits)))
            memo[j] = t
            return t

        return build(i)

    def functions(self) -> list[IndexedFunction]:
        members = self.members
        return [IndexedFunction(members[i].copy(), self.term(i)) for i in range(self.size)]


def maltsev_witness(alg: FiniteAlgebra, max_closure: int = DEFAULT_MAX_CLOSURE) -> Optional[Term]:
    """A minimal-depth Maltsev term in the clone of ``alg``, or None.

    Raises ResourceLimit when the closure outgrows ``max_closure``."""
    c = Closure(alg, max_closure).run()
    if c.found is None:
        return None
    t = c.term(c.found)
    vals = eval_term_vec(alg, t, list(c.domain.T))
    assert np.array_equal(vals, c.target), "witness provenance does not reproduce the target"
    return t


def closure_stats(alg: FiniteAlgebra, max_closure: int = DEFAULT_MAX_CLOSURE) -> ClosureStats:
    """Size and depth of the closure when the search stops.  The closure is
    only run to stabilization when no witness turns up on the way."""
    c = Closure(alg, max_closure).run()
    return ClosureStats(c.size, c.generations, c.found is not None)
