"""Intermediate syntax with explicit reads, writes and address-of, plus a CFG view.

Every array access ``ar[e]`` becomes a fresh address variable ``_bN`` bound by
``AddrOf(_bN, ar, e)`` followed by ``Read(_bN)`` or ``Write(_bN, value)``.
Elements occupy one cell, so offsets coincide with source indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import frontend as F


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class IntVar:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Read:
    addr: str  # address variable


@dataclass(frozen=True)
class ICmp:
    op: str
    lhs: object
    rhs: object


@dataclass(frozen=True)
class INot:
    arg: object


@dataclass(frozen=True)
class IAnd:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class IOr:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class IBool:
    value: bool


# ---------------------------------------------------------------- statements

@dataclass(frozen=True)
class Assign:
    name: str
    expr: object
    line: int = 0


@dataclass(frozen=True)
class AddrOf:
    """``a := &arr + offset``."""
    name: str
    array: str
    offset: object
    line: int = 0


@dataclass(frozen=True)
class Write:
    addr: str
    expr: object
    line: int = 0


@dataclass(frozen=True)
class If:
    prelude: tuple  # AddrOf/Assign statements evaluated before the test
    cond: object
    then: object
    els: object
    line: int = 0


@dataclass(frozen=True)
class While:
    prelude: tuple  # re-evaluated before every guard check
    cond: object
    body: object
    loop_id: int
    line: int = 0
    origin: str = ""
    pos: int = 0


@dataclass(frozen=True)
class Seq:
    items: tuple = ()


@dataclass(frozen=True)
class Return:
    expr: object | None
    line: int = 0


@dataclass(frozen=True)
class Break:
    line: int = 0


@dataclass(frozen=True)
class Skip:
    pass


# ---------------------------------------------------------------- lowering

class _Lowerer:
    def __init__(self):
        self.nb = 0
        self.nt = 0
        self.loop_id = 0

    def fresh_addr(self) -> str:
        self.nb += 1
        return f"_b{self.nb}"

    def fresh_tmp(self) -> str:
        self.nt += 1
        return f"_t{self.nt}"

    def expr(self, e, pre: list, in_addr=False):
        if isinstance(e, F.IntConst):
            return Const(e.value)
        if isinstance(e, F.Var):
            return IntVar(e.name)
        if isinstance(e, F.BinOp):
            return BinOp(e.op, self.expr(e.lhs, pre, in_addr), self.expr(e.rhs, pre, in_addr))
        if isinstance(e, F.ArrayAccess):
            b = self.address(e.array, e.index, pre)
            if in_addr:
                # keep address computations read-free
                t = self.fresh_tmp()
                pre.append(Assign(t, Read(b)))
                return IntVar(t)
            return Read(b)
        raise TypeError(f"cannot lower expression {e!r}")

    def address(self, arr: str, index, pre: list) -> str:
        off = self.expr(index, pre, in_addr=True)
        b = self.fresh_addr()
        pre.append(AddrOf(b, arr, off))
        return b

    def cond(self, c, pre: list):
        if isinstance(c, F.Cmp):
            return ICmp(c.op, self.expr(c.lhs, pre), self.expr(c.rhs, pre))
        if isinstance(c, F.Not):
            return INot(self.cond(c.arg, pre))
        if isinstance(c, F.And):
            return IAnd(self.cond(c.lhs, pre), self.cond(c.rhs, pre))
        if isinstance(c, F.Or):
            return IOr(self.cond(c.lhs, pre), self.cond(c.rhs, pre))
        if isinstance(c, F.BoolLit):
            return IBool(c.value)
        raise TypeError(f"cannot lower condition {c!r}")

    def stmt(self, s) -> list:
        if isinstance(s, F.Seq):
            out = []
            for it in s.items:
                out.extend(self.stmt(it))
            return out
        if isinstance(s, F.VarAssign):
            pre: list = []
            g = self.expr(s.expr, pre)
            return pre + [Assign(s.name, g, s.line)]
        if isinstance(s, F.Decl):
            if s.init is None:
                return [Assign(s.name, Const(0), s.line)]
            pre = []
            g = self.expr(s.init, pre)
            return pre + [Assign(s.name, g, s.line)]
        if isinstance(s, F.ArrAssign):
            pre = []
            b = self.address(s.array, s.index, pre)
            g = self.expr(s.expr, pre)
            return pre + [Write(b, g, s.line)]
        if isinstance(s, F.If):
            pre = []
            c = self.cond(s.cond, pre)
            return [If(tuple(pre), c, _seq(self.stmt(s.then)), _seq(self.stmt(s.els)), s.line)]
        if isinstance(s, F.While):
            lid = self.loop_id
            self.loop_id += 1
            pre = []
            c = self.cond(s.cond, pre)
            return [While(tuple(pre), c, _seq(self.stmt(s.body)), lid, s.line, s.origin, s.pos)]
        if isinstance(s, F.Return):
            if s.expr is None:
                return [Return(None, s.line)]
            pre = []
            g = self.expr(s.expr, pre)
            return pre + [Return(g, s.line)]
        if isinstance(s, F.Break):
            return [Break(s.line)]
        if isinstance(s, F.CallStmt):
            raise F.UnsupportedConstruct("CallNotInlined", s.line, s.fname)
        raise TypeError(f"cannot lower statement {s!r}")


def _seq(items: list):
    if not items:
        return Skip()
    return items[0] if len(items) == 1 else Seq(tuple(items))


def lower(fd: F.FunctionDef, funcs: dict | None = None):
    """Lower a validated function body; calls are inlined first when ``funcs`` is given."""
    if funcs is not None:
        fd = F.prepare(fd, funcs)
    return _seq(_Lowerer().stmt(fd.body))


def lower_condition(c):
    """Lower a side-effect-free precondition (no array reads)."""
    pre: list = []
    out = _Lowerer().cond(c, pre)
    if pre:
        raise F.UnsupportedConstruct("ArrayReadInPrecondition")
    return out


def lower_pure(e):
    """Lower a read-free expression."""
    pre: list = []
    out = _Lowerer().expr(e, pre)
    if pre:
        raise F.UnsupportedConstruct("ArrayReadInPrecondition")
    return out


def stmts(s) -> list:
    if isinstance(s, Seq):
        return list(s.items)
    if isinstance(s, Skip):
        return []
    return [s]


def walk(s):
    yield s
    if isinstance(s, Seq):
        for i in s.items:
            yield from walk(i)
    elif isinstance(s, If):
        for p in s.prelude:
            yield p
        yield from walk(s.then)
        yield from walk(s.els)
    elif isinstance(s, While):
        for p in s.prelude:
            yield p
        yield from walk(s.body)


def written_vars(s) -> set:
    """Scalars (including address and temp variables) assigned anywhere in ``s``."""
    out = set()
    for x in walk(s):
        if isinstance(x, (Assign, AddrOf)):
            out.add(x.name)
    return out


def written_arrays(s) -> set:
    """Arrays that are the target of some ``Write`` in ``s``."""
    owner = {x.name: x.array for x in walk(s) if isinstance(x, AddrOf)}
    return {owner[x.addr] for x in walk(s) if isinstance(x, Write) and x.addr in owner}


# ---------------------------------------------------------------- printing

def expr_str(g) -> str:
    if isinstance(g, Const):
        return str(g.value)
    if isinstance(g, IntVar):
        return g.name
    if isinstance(g, Read):
        return f"R({g.addr})"
    if isinstance(g, BinOp):
        return f"({expr_str(g.lhs)} {g.op} {expr_str(g.rhs)})"
    raise TypeError(g)


def cond_str(c) -> str:
    if c is None:
        return "true"
    if isinstance(c, ICmp):
        return f"{expr_str(c.lhs)} {c.op} {expr_str(c.rhs)}"
    if isinstance(c, INot):
        return f"!({cond_str(c.arg)})"
    if isinstance(c, IAnd):
        return f"({cond_str(c.lhs)} && {cond_str(c.rhs)})"
    if isinstance(c, IOr):
        return f"({cond_str(c.lhs)} || {cond_str(c.rhs)})"
    if isinstance(c, IBool):
        return "true" if c.value else "false"
    raise TypeError(c)


def stmt_str(s) -> str:
    if s is None or isinstance(s, Skip):
        return "id"
    if isinstance(s, Assign):
        return f"{s.name} := {expr_str(s.expr)}"
    if isinstance(s, AddrOf):
        return f"{s.name} := &{s.array} + {expr_str(s.offset)}"
    if isinstance(s, Write):
        return f"W({s.addr}, {expr_str(s.expr)})"
    if isinstance(s, Return):
        return "return" if s.expr is None else f"\\result := {expr_str(s.expr)}"
    if isinstance(s, Break):
        return "break"
    raise TypeError(s)


# ---------------------------------------------------------------- CFG

ENTRY, LOOPHEAD, BRANCH, PLAIN, EXIT = "entry", "loopHead", "branch", "plain", "exit"


@dataclass(frozen=True)
class Location:
    id: int
    kind: str


@dataclass(frozen=True)
class Transition:
    src: Location
    dst: Location
    guard: object  # IR condition or None (true)
    update: object  # simple IR statement or None (identity)
    loop_id: int | None = None


@dataclass
class Cfg:
    locations: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    init_cond: object = None
    entry: Location | None = None
    exit: Location | None = None

    def out(self, loc: Location) -> list:
        return [t for t in self.transitions if t.src == loc]

    def dump(self) -> str:
        lines = []
        for t in sorted(self.transitions, key=lambda t: (t.src.id, t.dst.id)):
            lines.append(f"ℓ{t.src.id} --[{cond_str(t.guard)}]--> ℓ{t.dst.id} : {stmt_str(t.update)}")
        return "\n".join(lines)


def negate_cond(c):
    return INot(c)


def build_cfg(s, init_cond=None) -> Cfg:
    cfg = Cfg(init_cond=init_cond)

    def new(kind=PLAIN) -> Location:
        loc = Location(len(cfg.locations), kind)
        cfg.locations.append(loc)
        return loc

    def edge(a, b, guard=None, upd=None, lid=None):
        cfg.transitions.append(Transition(a, b, guard, upd, lid))

    entry = new(ENTRY)
    exit_ = new(EXIT)
    cfg.entry, cfg.exit = entry, exit_

    def chain(items, src, dst):
        cur = src
        for k, it in enumerate(items):
            nxt = dst if k == len(items) - 1 else new()
            edge(cur, nxt, None, it)
            cur = nxt
        if not items:
            edge(src, dst)

    def build(st, src, dst, brk):
        if isinstance(st, Skip) or (isinstance(st, Seq) and not st.items):
            edge(src, dst)
        elif isinstance(st, Seq):
            cur = src
            for k, it in enumerate(st.items):
                nxt = dst if k == len(st.items) - 1 else new()
                build(it, cur, nxt, brk)
                cur = nxt
        elif isinstance(st, (Assign, AddrOf, Write)):
            edge(src, dst, None, st)
        elif isinstance(st, Return):
            edge(src, exit_, None, st)
        elif isinstance(st, Break):
            edge(src, brk)
        elif isinstance(st, If):
            b = new(BRANCH)
            chain(list(st.prelude), src, b)
            lt, le = new(), new()
            edge(b, lt, st.cond)
            edge(b, le, negate_cond(st.cond))
            build(st.then, lt, dst, brk)
            build(st.els, le, dst, brk)
        elif isinstance(st, While):
            head = new(LOOPHEAD)
            edge(src, head, None, None, st.loop_id)
            g = new(BRANCH)
            chain(list(st.prelude), head, g)
            lb = new()
            edge(g, lb, st.cond)
            edge(g, dst, negate_cond(st.cond))
            build(st.body, lb, head, dst)
        else:
            raise TypeError(st)

    build(s, entry, exit_, None)
    return cfg


# ---------------------------------------------------------------- concrete semantics

class IrOutOfBounds(Exception):
    pass


def eval_concrete(g, env: dict, arrays: dict) -> int:
    if isinstance(g, Const):
        return g.value
    if isinstance(g, IntVar):
        return env[g.name]
    if isinstance(g, BinOp):
        l, r = eval_concrete(g.lhs, env, arrays), eval_concrete(g.rhs, env, arrays)
        return l + r if g.op == "+" else l - r if g.op == "-" else l * r
    if isinstance(g, Read):
        arr, idx = env[g.addr]
        if not 0 <= idx < len(arrays[arr]):
            raise IrOutOfBounds(arr, idx)
        return arrays[arr][idx]
    raise TypeError(g)


def holds_concrete(c, env, arrays) -> bool:
    if c is None:
        return True
    if isinstance(c, ICmp):
        l, r = eval_concrete(c.lhs, env, arrays), eval_concrete(c.rhs, env, arrays)
        return {"<=": l <= r, "<": l < r, ">=": l >= r, ">": l > r,
                "==": l == r, "!=": l != r}[c.op]
    if isinstance(c, INot):
        return not holds_concrete(c.arg, env, arrays)
    if isinstance(c, IAnd):
        return holds_concrete(c.lhs, env, arrays) and holds_concrete(c.rhs, env, arrays)
    if isinstance(c, IOr):
        return holds_concrete(c.lhs, env, arrays) or holds_concrete(c.rhs, env, arrays)
    if isinstance(c, IBool):
        return c.value
    raise TypeError(c)


def run_cfg(cfg: Cfg, env: dict, arrays: dict, fuel: int = 100_000):
    """Execute the CFG concretely; returns (env, arrays, result)."""
    env = dict(env)
    arrays = {k: list(v) for k, v in arrays.items()}
    loc = cfg.entry
    result = None
    outs: dict = {}
    for t in cfg.transitions:
        outs.setdefault(t.src, []).append(t)
    while loc != cfg.exit:
        fuel -= 1
        if fuel < 0:
            raise TimeoutError("fuel exhausted")
        for t in outs.get(loc, []):
            if holds_concrete(t.guard, env, arrays):
                break
        else:
            raise RuntimeError(f"stuck at ℓ{loc.id}")
        u = t.update
        if isinstance(u, Assign):
            env[u.name] = eval_concrete(u.expr, env, arrays)
        elif isinstance(u, AddrOf):
            env[u.name] = (u.array, eval_concrete(u.offset, env, arrays))
        elif isinstance(u, Write):
            arr, idx = env[u.addr]
            if not 0 <= idx < len(arrays[arr]):
                raise IrOutOfBounds(arr, idx)
            arrays[arr][idx] = eval_concrete(u.expr, env, arrays)
        elif isinstance(u, Return):
            if u.expr is not None:
                result = eval_concrete(u.expr, env, arrays)
        loc = t.dst
    return env, arrays, result
