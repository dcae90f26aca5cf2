"""Symbolic addresses and states (memory map plus address map)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

from .expr import OpaqueRead, SymExpr


class UnboundVariable(Exception):
    pass


@dataclass(frozen=True)
class SymAddr:
    """Base-plus-offset address.  ``base`` names a program variable; distinct
    variables never share a base, so addresses with different bases never alias."""

    base: str
    offset: SymExpr

    def __post_init__(self):
        object.__setattr__(self, "offset", SymExpr.lift(self.offset))

    def shifted(self, k) -> "SymAddr":
        return SymAddr(self.base, self.offset + k)

    def __repr__(self):
        return f"({self.base}, {self.offset!r})"


Value = Union[SymExpr, SymAddr]


@dataclass
class SymbolicState:
    """``mem`` maps addresses to values, ``addr`` maps variables to addresses.

    Treated as a value: updates go through :meth:`with_mem`, which copies.
    """

    mem: dict = field(default_factory=dict)
    addr: dict = field(default_factory=dict)

    def with_mem(self, updates: dict | None = None, drop=()) -> "SymbolicState":
        m = dict(self.mem)
        for k in drop:
            m.pop(k, None)
        if updates:
            m.update(updates)
        return SymbolicState(m, self.addr)

    def var_addr(self, name: str) -> SymAddr:
        try:
            return self.addr[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def lookup(self, name: str) -> Value:
        a = self.var_addr(name)
        if a not in self.mem:
            raise UnboundVariable(name)
        return self.mem[a]

    def array_keys(self, base: str):
        return [k for k in self.mem if k.base == base]


def default_read(state: SymbolicState, a: SymAddr) -> SymExpr:
    v = state.mem.get(a)
    if isinstance(v, SymExpr):
        return v
    return SymExpr.atom(OpaqueRead(a.base, a.offset, 0))


def eval_expr(g, state: SymbolicState,
              read: Callable[[SymAddr], SymExpr] | None = None) -> Value:
    """Symbolic value of an IR expression.

    ``Read(a)`` dereferences twice: the address stored in ``a``, then the cell
    at that address (through ``read`` when given).
    """
    from ..ir import BinOp, Const, IntVar, Read

    if isinstance(g, Const):
        return SymExpr(g.value)
    if isinstance(g, IntVar):
        return state.lookup(g.name)
    if isinstance(g, BinOp):
        l = eval_expr(g.lhs, state, read)
        r = eval_expr(g.rhs, state, read)
        if isinstance(l, SymAddr) or isinstance(r, SymAddr):
            raise TypeError("arithmetic on addresses is lowered into AddrOf")
        if g.op == "+":
            return l + r
        if g.op == "-":
            return l - r
        return l * r
    if isinstance(g, Read):
        target = state.lookup(g.addr)
        if not isinstance(target, SymAddr):
            raise TypeError(f"{g.addr} does not hold an address")
        return read(target) if read else default_read(state, target)
    raise TypeError(f"not an IR expression: {g!r}")
