"""ACSL rendering of formulas, contracts and loop annotations."""

from __future__ import annotations

import re

from .symcore import (
    ENTRY, LENGTH, LOOPENTRY, LOOPHEAD, And, BoolConst, BoundVar, Cell, Cmp,
    OpaqueRead, Or, Quant, ResultAtom, SymExpr, SymVal, render,
)


class Unrenderable(Exception):
    """A formula mentions an internal symbol with no source-level name."""


POST, LOOP = "post", "loop"


class Namer:
    """Maps atoms to ACSL terms.

    ``assigned`` holds scalars assigned somewhere in the function (their entry
    values print as ``\\old(x)``); ``written`` holds arrays written somewhere.
    """

    def __init__(self, assigned=(), written=(), mode: str = POST):
        self.assigned = set(assigned)
        self.written = set(written)
        self.mode = mode

    def __call__(self, a) -> str:
        if isinstance(a, SymVal):
            if a.kind == ENTRY:
                return f"\\old({a.name})" if a.name in self.assigned else a.name
            if a.kind == LENGTH:
                return f"len_{a.name}"
            if a.kind == LOOPHEAD:
                return a.name
            if a.kind == LOOPENTRY:
                return f"\\at({a.name}, LoopEntry)"
            raise Unrenderable(repr(a))
        if isinstance(a, BoundVar):
            return a.name
        if isinstance(a, ResultAtom):
            return "\\result"
        if isinstance(a, Cell):
            return f"{a.base}[{self.expr(a.offset)}]"
        if isinstance(a, OpaqueRead):
            if a.gen != 0:
                raise Unrenderable(repr(a))
            cell = f"{a.base}[{self.expr(a.offset)}]"
            if a.base not in self.written:
                return cell
            return f"\\old({cell})" if self.mode == POST else f"\\at({cell}, Pre)"
        raise Unrenderable(repr(a))

    def expr(self, e: SymExpr) -> str:
        return render(SymExpr.lift(e), self)


def _cmp(f: Cmp, nm: Namer) -> str:
    return f"{nm.expr(f.lhs)} {f.op} {nm.expr(f.rhs)}"


def _chain(f: And, nm: Namer) -> str | None:
    """``a <= b <= c`` for a two-item conjunction sharing its middle term."""
    if len(f.items) != 2 or not all(isinstance(i, Cmp) for i in f.items):
        return None
    x, y = f.items
    if x.op in ("<=", "<") and y.op in ("<=", "<") and x.rhs == y.lhs:
        return f"{nm.expr(x.lhs)} {x.op} {nm.expr(x.rhs)} {y.op} {nm.expr(y.rhs)}"
    return None


def render_formula(f, nm: Namer, top: bool = True) -> str:
    if isinstance(f, BoolConst):
        return "\\true" if f.value else "\\false"
    if isinstance(f, Cmp):
        return _cmp(f, nm)
    if isinstance(f, And):
        ch = _chain(f, nm)
        if ch is not None:
            return ch
        parts = [_wrap(i, nm, (Or, Quant)) for i in f.items]
        s = " && ".join(parts)
        return s if top else f"({s})"
    if isinstance(f, Or):
        parts = [_wrap(i, nm, (And, Quant)) for i in f.items]
        s = " || ".join(parts)
        return s if top else f"({s})"
    if isinstance(f, Quant):
        v = f.var.name
        if f.lo is None:
            head = f"\\{f.q} integer {v}; "
            return head + render_formula(f.body, nm, True)
        lo = nm.expr(f.lo)
        rng = (f"{lo} <= {v} <= {nm.expr(f.hi - 1)}" if f.incl
               else f"{lo} <= {v} < {nm.expr(f.hi)}")
        if f.q == "forall":
            body = _wrap(f.body, nm, ())
            return f"\\forall integer {v}; {rng} ==> {body}"
        body = _wrap(f.body, nm, (Or,))
        return f"\\exists integer {v}; {rng} && {body}"
    raise TypeError(f)


def _wrap(f, nm: Namer, paren_types) -> str:
    s = render_formula(f, nm, True)
    if isinstance(f, paren_types) and not (isinstance(f, And) and _chain(f, nm)):
        return f"({s})"
    return s


def render_range(array: str, lo: SymExpr, hi: SymExpr, nm: Namer, length=None) -> str:
    """Half-open ``[lo, hi)`` as an inclusive ACSL range."""
    lo, hi = SymExpr.lift(lo), SymExpr.lift(hi)
    if length is not None and lo == SymExpr(0) and hi == SymExpr.lift(length):
        return f"{array}[..]"
    last = hi - 1
    if last == lo:
        return f"{array}[{nm.expr(lo)}]"
    return f"{array}[{nm.expr(lo)} .. {nm.expr(last)}]"


# ---------------------------------------------------------------- source weaving

_ANNOT = re.compile(r"/\*@.*?\*/\n?[ \t]*", re.S)


def strip_annotations(text: str) -> str:
    """Remove every ``/*@ ... */`` block with the line break and indentation after it."""
    return _ANNOT.sub("", text)


def _indent_of(text: str, pos: int) -> str:
    ls = text.rfind("\n", 0, pos) + 1
    m = re.match(r"[ \t]*", text[ls:pos])
    return m.group(0) if m else ""


def header_block(c, indent: str = "") -> str:
    lines = [f"requires {t};" for t in c.requires_text()]
    lines += [f"assigns {t};" for t in c.assigns_text()]
    lines += [f"ensures {c.post_text()};"]
    return _block(lines, indent)


def loop_block(lb, indent: str) -> str:
    lines = [f"loop invariant {t};" for t in lb.invariants]
    lines.append(f"loop assigns {', '.join(lb.assigns) if lb.assigns else chr(92) + 'nothing'};")
    return _block(lines, indent)


def _block(lines, indent: str) -> str:
    if len(lines) == 1:
        return f"/*@ {lines[0]} */"
    body = f"\n{indent}  ".join(lines)
    return f"/*@ {body}\n{indent}*/"


def _loop_annot_start(src: str, pos: int) -> int:
    """Start of an annotation block sitting right before the loop at ``pos``, else ``pos``."""
    head = src[:pos].rstrip()
    if not head.endswith("*/"):
        return pos
    k = head.rfind("/*@")
    if k < 0 or "*/" in head[k:-2]:
        return pos
    return k


def annotate(src: str, contracts) -> str:
    """Weave contracts (one per function) into ``src``.

    An existing leading annotation of a function is replaced; the text outside
    annotation blocks is left byte-for-byte intact, so stripping every block of
    the result gives the stripped input back.
    """
    edits = []  # (start, end, text)
    for c in contracts:
        if c.annot_span is not None:
            s, e = c.annot_span
            ind = _indent_of(src, s)
            edits.append((s, e, header_block(c, ind)))
        else:
            ind = _indent_of(src, c.start)
            edits.append((c.start, c.start, header_block(c, ind) + "\n" + ind))
        for lb in c.loops:
            ind = _indent_of(src, lb.pos)
            edits.append((_loop_annot_start(src, lb.pos), lb.pos, loop_block(lb, ind) + "\n" + ind))
    out, last = [], 0
    for s, e, t in sorted(edits, key=lambda x: (x[0], x[1])):
        out.append(src[last:s])
        out.append(t)
        last = max(last, e)
    out.append(src[last:])
    return "".join(out)
