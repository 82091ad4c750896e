"""Terms over a signature and their s-expression syntax.

Variables print as ``v0``, ``v1``, ...; applications as ``(op t1 ... tn)``.
A constant is an application with no arguments, ``(op)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError

_VAR_RE = re.compile(r"v(0|[1-9][0-9]*)\Z")


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative variable index {self.index}")

    def __str__(self):
        return f"v{self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        if not self.args:
            return f"({self.op})"
        return "(" + " ".join([self.op, *map(str, self.args)]) + ")"


Term = Union[Var, App]


def depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((depth(a) for a in t.args), default=0)


def max_var(t: Term) -> int:
    """Largest variable index occurring in ``t``, or -1 for a closed term."""
    if isinstance(t, Var):
        return t.index
    return max((max_var(a) for a in t.args), default=-1)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], i
            i = j


def parse_term(text: str) -> Term:
    """Parse an s-expression.  Whitespace between tokens is insignificant."""
    toks = list(_tokenize(text))
    if not toks:
        raise ParseError("empty term", 0)
    pos = 0

    def parse() -> Term:
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of term", len(text))
        tok, off = toks[pos]
        pos += 1
        if tok == ")":
            raise ParseError("unexpected ')'", off)
        if tok != "(":
            if not _VAR_RE.match(tok):
                raise ParseError(f"bad variable {tok!r}; constants need parentheses", off)
            return Var(int(tok[1:]))
        if pos >= len(toks):
            raise ParseError("unexpected end of term", len(text))
        op, op_off = toks[pos]
        if op in "()":
            raise ParseError("expected operation name", op_off)
        pos += 1
        args = []
        while True:
            if pos >= len(toks):
                raise ParseError(f"unclosed '(' for {op!r}", off)
            if toks[pos][0] == ")":
                pos += 1
                return App(op, tuple(args))
            args.append(parse())

    t = parse()
    if pos != len(toks):
        raise ParseError("trailing input after term", toks[pos][1])
    return t


def format_term(t: Term) -> str:
    return str(t)
