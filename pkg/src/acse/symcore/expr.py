"""Symbolic values, atoms and the canonical polynomial form of symbolic expressions.

A :class:`SymExpr` is ``c0 + sum(ci * ti)`` where every ``ti`` is an :class:`Atom`.
Products of non-constant terms are folded into :class:`Mono` atoms, so the
representation stays canonical: two expressions are equal as polynomials over
their atoms iff they are structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Callable, Iterable, Mapping

# SymVal kinds, in rendering/sort order.
ENTRY = "entry"
LENGTH = "length"
LOOPHEAD = "loophead"
LOOPENTRY = "loopentry"
EXIT = "exit"
ITER = "iter"
HAVOC = "havoc"

_KIND_RANK = {ENTRY: 0, LENGTH: 1, LOOPENTRY: 2, LOOPHEAD: 3, EXIT: 4, ITER: 5, HAVOC: 6}

# kinds that never correspond to a source-level term at function boundaries
AUX_KINDS = frozenset({EXIT, ITER, HAVOC, LOOPHEAD, LOOPENTRY})


class Atom:
    """Base class of the non-constant leaves of a SymExpr."""

    __slots__ = ()

    def sort_key(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple["SymExpr", ...]:
        return ()

    def rebuild(self, children: tuple["SymExpr", ...]) -> "SymExpr":
        return SymExpr.atom(self)

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True, eq=True)
class SymVal(Atom):
    """A symbolic value. ``kind`` records where it came from."""

    id: int
    kind: str
    name: str
    loop: int | None = None

    def sort_key(self):
        return (0, _KIND_RANK[self.kind], self.id, self.name)

    def __repr__(self):
        tag = {ENTRY: "", LENGTH: "len_", LOOPHEAD: "@", LOOPENTRY: "^",
               EXIT: "!", ITER: "#", HAVOC: "?"}[self.kind]
        return f"{tag}{self.name}{self.id}"


@dataclass(frozen=True)
class BoundVar(Atom):
    """Variable bound by a quantifier (or an existentially bound auxiliary)."""

    name: str

    def sort_key(self):
        return (1, self.name)

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class IOff(Atom):
    """Relative-offset placeholder used in segment content summaries."""

    def sort_key(self):
        return (2,)

    def __repr__(self):
        return "i_off"


@dataclass(frozen=True)
class ResultAtom(Atom):
    def sort_key(self):
        return (3,)

    def __repr__(self):
        return "\\result"


@dataclass(frozen=True)
class OpaqueRead(Atom):
    """Content of ``base[offset]`` as of generation ``gen``.

    Generation 0 is the function entry; positive generations belong to
    havocked (Unknown) segments and never unify with entry reads.
    """

    base: str
    offset: "SymExpr"
    gen: int = 0

    def sort_key(self):
        return (4, self.base, self.gen, self.offset.sort_key())

    def children(self):
        return (self.offset,)

    def rebuild(self, children):
        return SymExpr.atom(OpaqueRead(self.base, children[0], self.gen))

    def __repr__(self):
        g = "" if self.gen == 0 else f"@{self.gen}"
        return f"{self.base}[{self.offset}]{g}"


@dataclass(frozen=True)
class Cell(Atom):
    """Content of ``base[offset]`` in the *current* state (final state in a
    postcondition, loop-head state in a loop invariant)."""

    base: str
    offset: "SymExpr"

    def sort_key(self):
        return (5, self.base, self.offset.sort_key())

    def children(self):
        return (self.offset,)

    def rebuild(self, children):
        return SymExpr.atom(Cell(self.base, children[0]))

    def __repr__(self):
        return f"{self.base}'[{self.offset}]"


@dataclass(frozen=True)
class Aggregate(Atom):
    """Reduction ``op`` over ``base[start .. start+length)``."""

    op: str
    base: str
    start: "SymExpr"
    length: "SymExpr"

    def sort_key(self):
        return (6, self.op, self.base, self.start.sort_key(), self.length.sort_key())

    def children(self):
        return (self.start, self.length)

    def rebuild(self, children):
        return SymExpr.atom(Aggregate(self.op, self.base, children[0], children[1]))

    def __repr__(self):
        return f"{self.op}({self.base}[{self.start} .. +{self.length}])"


@dataclass(frozen=True)
class Mono(Atom):
    """Product of two or more atoms (sorted, with repetition)."""

    factors: tuple[Atom, ...]

    def sort_key(self):
        return (7, len(self.factors), tuple(f.sort_key() for f in self.factors))

    def children(self):
        return tuple(SymExpr.atom(f) for f in self.factors)

    def rebuild(self, children):
        out = SymExpr(1)
        for c in children:
            out = out * c
        return out

    def __repr__(self):
        return "*".join(repr(f) for f in self.factors)


class SymExpr:
    """Immutable canonical polynomial ``const + sum(coef * atom)``."""

    __slots__ = ("const", "terms", "_hash")

    def __init__(self, const: int = 0, terms: Iterable[tuple[Atom, int]] = ()):
        acc: dict[Atom, int] = {}
        for a, c in terms:
            if c:
                acc[a] = acc.get(a, 0) + c
        self.const = int(const)
        self.terms = tuple(sorted(((a, c) for a, c in acc.items() if c),
                                  key=lambda t: t[0].sort_key()))
        self._hash = None

    # -- constructors
    @staticmethod
    def atom(a: Atom, coef: int = 1) -> "SymExpr":
        return SymExpr(0, [(a, coef)])

    @staticmethod
    def lift(x) -> "SymExpr":
        if isinstance(x, SymExpr):
            return x
        if isinstance(x, int):
            return SymExpr(x)
        if isinstance(x, Atom):
            return SymExpr.atom(x)
        raise TypeError(f"cannot lift {x!r} to SymExpr")

    # -- queries
    def is_const(self) -> bool:
        return not self.terms

    def coeff(self, a: Atom) -> int:
        for t, c in self.terms:
            if t == a:
                return c
        return 0

    def atoms(self) -> set[Atom]:
        return {a for a, _ in self.terms}

    def all_atoms(self) -> set[Atom]:
        """Atoms including those nested inside other atoms."""
        out: set[Atom] = set()
        for a, _ in self.terms:
            out.add(a)
            if isinstance(a, Mono):
                out.update(a.factors)
            for ch in a.children():
                out |= ch.all_atoms()
        return out

    def mentions(self, pred: Callable[[Atom], bool]) -> bool:
        return any(pred(a) for a in self.all_atoms())

    def content_gcd(self) -> int:
        g = 0
        for _, c in self.terms:
            g = gcd(g, c)
        return g

    def sort_key(self):
        return (self.const, tuple((a.sort_key(), c) for a, c in self.terms))

    def without_const(self) -> "SymExpr":
        return SymExpr(0, self.terms)

    # -- arithmetic
    def __add__(self, other):
        other = SymExpr.lift(other)
        return SymExpr(self.const + other.const, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr(-self.const, [(a, -c) for a, c in self.terms])

    def __sub__(self, other):
        return self + (-SymExpr.lift(other))

    def __rsub__(self, other):
        return SymExpr.lift(other) - self

    def __mul__(self, other):
        other = SymExpr.lift(other)
        if other.is_const():
            k = other.const
            return SymExpr(self.const * k, [(a, c * k) for a, c in self.terms])
        if self.is_const():
            return other * self
        terms: list[tuple[Atom, int]] = []
        for a, c in self.terms:
            terms.append((a, c * other.const))
        for b, d in other.terms:
            terms.append((b, d * self.const))
        for a, c in self.terms:
            for b, d in other.terms:
                terms.append((_mono(a, b), c * d))
        return SymExpr(self.const * other.const, terms)

    __rmul__ = __mul__

    # -- structural equality
    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_const() and self.const == other
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self.const == other.const and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.const, self.terms))
        return self._hash

    # -- transformation
    def substitute(self, mapping: Mapping[Atom, "SymExpr"]) -> "SymExpr":
        """Simultaneous substitution of atoms (also inside nested atoms)."""
        if not mapping:
            return self
        out = SymExpr(self.const)
        for a, c in self.terms:
            out = out + _subst_atom(a, mapping) * c
        return out

    def evaluate(self, val: Callable[[Atom], int]) -> int:
        total = self.const
        for a, c in self.terms:
            total += c * eval_atom(a, val)
        return total

    def __repr__(self):
        return render(self, repr)



def _mono(a: Atom, b: Atom) -> Atom:
    fa = a.factors if isinstance(a, Mono) else (a,)
    fb = b.factors if isinstance(b, Mono) else (b,)
    return Mono(tuple(sorted(fa + fb, key=lambda t: t.sort_key())))


def _subst_atom(a: Atom, mapping: Mapping[Atom, SymExpr]) -> SymExpr:
    if a in mapping:
        return SymExpr.lift(mapping[a])
    kids = a.children()
    if not kids:
        return SymExpr.atom(a)
    if isinstance(a, Mono):
        out = SymExpr(1)
        for f in a.factors:
            out = out * _subst_atom(f, mapping)
        return out
    new = tuple(k.substitute(mapping) for k in kids)
    if new == kids:
        return SymExpr.atom(a)
    return a.rebuild(new)


def eval_atom(a: Atom, val: Callable[[Atom], int]) -> int:
    if isinstance(a, Mono):
        p = 1
        for f in a.factors:
            p *= eval_atom(f, val)
        return p
    return val(a)


def C(c: int) -> SymExpr:
    return SymExpr(c)


def V(a: Atom) -> SymExpr:
    return SymExpr.atom(a)


def render(e: SymExpr, name: Callable[[Atom], str]) -> str:
    """Render ``e`` with atoms named by ``name``; constant last."""
    parts: list[str] = []
    for a, c in e.terms:
        if isinstance(a, Mono):
            body = "*".join(_paren_atom(f, name) for f in a.factors)
        else:
            body = name(a)
        mag = abs(c)
        txt = body if mag == 1 else f"{mag}*{body}"
        if not parts:
            parts.append(txt if c > 0 else f"-{txt}")
        else:
            parts.append(("+ " if c > 0 else "- ") + txt)
    if e.const or not parts:
        if not parts:
            parts.append(str(e.const))
        else:
            parts.append(("+ " if e.const > 0 else "- ") + str(abs(e.const)))
    return " ".join(parts)


def _paren_atom(a: Atom, name) -> str:
    txt = name(a)
    return f"({txt})" if " " in txt and not txt.startswith("\\") else txt


class Fresh:
    """Counter handing out globally unique SymVal ids and segment generations."""

    def __init__(self):
        self._next = 0
        self._gen = 0

    def val(self, kind: str, name: str, loop: int | None = None) -> SymVal:
        self._next += 1
        return SymVal(self._next, kind, name, loop)

    def gen(self) -> int:
        self._gen += 1
        return self._gen
