"""Concrete interpreter and contract validator.

The interpreter runs the mini-C AST directly, recording a snapshot at every
loop-head visit.  The validator checks a contract against concrete runs: some
postcondition disjunct holds, every changed array cell lies in the assigns
footprint, and every loop invariant (and loop assigns clause) holds at each
loop-head snapshot.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import frontend as F
from .symcore import (
    ENTRY, LENGTH, LOOPENTRY, LOOPHEAD, Cell, EvalError, OpaqueRead, ResultAtom,
    SymExpr, SymVal, evaluate,
)

DEFAULT_FUEL = 100_000


class NonTermination(Exception):
    pass


class OutOfBounds(Exception):
    def __init__(self, array: str, index: int):
        super().__init__(f"{array}[{index}] out of bounds")
        self.array, self.index = array, index


class PreconditionUnsatisfiable(Exception):
    pass


@dataclass
class ConcreteState:
    ints: dict
    arrays: dict

    def copy(self) -> "ConcreteState":
        return ConcreteState(dict(self.ints), {k: list(v) for k, v in self.arrays.items()})

    def as_dict(self) -> dict:
        return {**self.ints, **{k: list(v) for k, v in self.arrays.items()}}


@dataclass
class TraceEvent:
    loop_id: int
    iteration: int
    snapshot: ConcreteState
    entry: ConcreteState  # state when control first reached this loop (this entry)
    kind: str = "loopHeadVisit"


# ---------------------------------------------------------------- interpreter

class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class Interpreter:
    def __init__(self, fd: F.FunctionDef, fuel: int = DEFAULT_FUEL):
        self.fd = fd
        self.fuel = fuel
        self.ids = {id(w): k for k, w in enumerate(F.loops(fd.body))}
        self.trace: list[TraceEvent] = []
        self.counts: dict = {}

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise NonTermination(self.fd.name)

    def expr(self, e, st: ConcreteState) -> int:
        if isinstance(e, F.IntConst):
            return e.value
        if isinstance(e, F.Var):
            if e.name not in st.ints:
                raise KeyError(e.name)
            return st.ints[e.name]
        if isinstance(e, F.BinOp):
            a, b = self.expr(e.lhs, st), self.expr(e.rhs, st)
            return a + b if e.op == "+" else a - b if e.op == "-" else a * b
        if isinstance(e, F.ArrayAccess):
            arr = st.arrays[e.array]
            k = self.expr(e.index, st)
            if not 0 <= k < len(arr):
                raise OutOfBounds(e.array, k)
            return arr[k]
        raise F.UnsupportedConstruct(type(e).__name__, 0)

    def cond(self, c, st: ConcreteState) -> bool:
        if isinstance(c, F.Cmp):
            a, b = self.expr(c.lhs, st), self.expr(c.rhs, st)
            return {"<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b,
                    "==": a == b, "!=": a != b}[c.op]
        if isinstance(c, F.Not):
            return not self.cond(c.arg, st)
        if isinstance(c, F.And):
            return self.cond(c.lhs, st) and self.cond(c.rhs, st)
        if isinstance(c, F.Or):
            return self.cond(c.lhs, st) or self.cond(c.rhs, st)
        if isinstance(c, F.BoolLit):
            return c.value
        if isinstance(c, F.Valid):
            lo, hi = self.expr(c.lo, st), self.expr(c.hi, st)
            return lo > hi or (0 <= lo and hi < len(st.arrays[c.array]))
        raise F.UnsupportedConstruct(type(c).__name__, 0)

    def stmt(self, s, st: ConcreteState):
        self.tick()
        if isinstance(s, F.Seq):
            for x in s.items:
                self.stmt(x, st)
        elif isinstance(s, F.VarAssign):
            st.ints[s.name] = self.expr(s.expr, st)
        elif isinstance(s, F.Decl):
            st.ints[s.name] = 0 if s.init is None else self.expr(s.init, st)
        elif isinstance(s, F.ArrAssign):
            arr = st.arrays[s.array]
            k = self.expr(s.index, st)
            v = self.expr(s.expr, st)
            if not 0 <= k < len(arr):
                raise OutOfBounds(s.array, k)
            arr[k] = v
        elif isinstance(s, F.If):
            self.stmt(s.then if self.cond(s.cond, st) else s.els, st)
        elif isinstance(s, F.While):
            lid = self.ids[id(s)]
            entry = st.copy()
            while True:
                it = self.counts.get(lid, 0)
                self.counts[lid] = it + 1
                self.trace.append(TraceEvent(lid, it, st.copy(), entry))
                self.tick()
                if not self.cond(s.cond, st):
                    break
                try:
                    self.stmt(s.body, st)
                except _Break:
                    break
        elif isinstance(s, F.Return):
            raise _Return(None if s.expr is None else self.expr(s.expr, st))
        elif isinstance(s, F.Break):
            raise _Break()
        else:
            raise F.UnsupportedConstruct(type(s).__name__, getattr(s, "line", 0))


def interpret(fd: F.FunctionDef, inp: ConcreteState, fuel: int = DEFAULT_FUEL, funcs=None):
    """Run ``fd`` on ``inp``; returns (final state, result, trace).

    Calls are inlined first when ``funcs`` is given, so loop ids agree with the
    symbolic side.
    """
    if funcs is not None:
        fd = F.prepare(fd, funcs)
    it = Interpreter(fd, fuel)
    st = inp.copy()
    result = None
    try:
        it.stmt(fd.body, st)
    except _Return as r:
        result = r.value
    return st, result, it.trace


# ---------------------------------------------------------------- inputs

@dataclass(frozen=True)
class Domain:
    ints: tuple = tuple(range(-4, 5))
    max_len: int = 4
    values: tuple = tuple(range(-2, 3))

    def arrays(self):
        for n in range(self.max_len + 1):
            yield from (list(t) for t in itertools.product(self.values, repeat=n))

    def size(self, n_ints: int, n_arrays: int) -> int:
        per = sum(len(self.values) ** n for n in range(self.max_len + 1))
        return len(self.ints) ** n_ints * per ** n_arrays


DEFAULT_DOMAIN = Domain()


def _holds(it: Interpreter, pre, st: ConcreteState) -> bool:
    if pre is None:
        return True
    try:
        return it.cond(pre, st)
    except OutOfBounds:
        return False


def _valid_floor(pre, ints: dict) -> dict:
    """Minimum array lengths implied by ``\\valid`` conjuncts of ``pre``."""
    out = {}
    todo = [pre]
    while todo:
        c = todo.pop()
        if isinstance(c, F.And):
            todo += [c.lhs, c.rhs]
        elif isinstance(c, F.Valid):
            try:
                st = ConcreteState(ints, {})
                it = Interpreter(F.FunctionDef("", (), F.Seq(())))
                lo, hi = it.expr(c.lo, st), it.expr(c.hi, st)
            except (KeyError, OutOfBounds):
                continue
            if lo <= hi:
                out[c.array] = max(out.get(c.array, 0), hi + 1)
    return out


def gen_inputs(fd: F.FunctionDef, pre=None, budget: int = 20_000, samples: int = 2_000,
               domain: Domain = DEFAULT_DOMAIN, seed: int = 0, mode: str = "auto"):
    """Inputs satisfying ``pre``: exhaustive when the domain fits ``budget``,
    otherwise ``samples`` draws by rejection sampling.

    ``mode`` is "auto", "exhaustive" (always enumerate) or "random".
    """
    ints, arrays = fd.ints(), fd.arrays()
    size = domain.size(len(ints), len(arrays))
    checker = Interpreter(fd)
    produced = 0
    if mode == "exhaustive" or (mode == "auto" and size <= budget):
        arr_dom = list(domain.arrays())
        for iv in itertools.product(domain.ints, repeat=len(ints)):
            for av in itertools.product(arr_dom, repeat=len(arrays)):
                st = ConcreteState(dict(zip(ints, iv)), {a: list(v) for a, v in zip(arrays, av)})
                if _holds(checker, pre, st):
                    produced += 1
                    yield st
    else:
        rng = random.Random(seed)
        tries = 0
        while produced < samples and tries < samples * 200:
            tries += 1
            iv = {x: rng.choice(domain.ints) for x in ints}
            floor = _valid_floor(pre, iv) if pre is not None else {}
            av = {}
            for a in arrays:
                lo = min(floor.get(a, 0), domain.max_len)
                n = rng.randint(lo, domain.max_len)
                av[a] = [rng.choice(domain.values) for _ in range(n)]
            st = ConcreteState(iv, av)
            if _holds(checker, pre, st):
                produced += 1
                yield st
    if produced == 0:
        raise PreconditionUnsatisfiable(fd.name)


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    inputs_tested: int = 0
    failures: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"inputs_tested": self.inputs_tested, "failures": self.failures,
                "warnings": self.warnings}


# Values tried for array cells outside the bounds.  Logic arrays are total,
# so such a cell holds some unspecified value; a formula counts as true only
# when it holds whatever that value is.
OOB_FILLERS = (0, -7, 11)


def valuation(inp: ConcreteState, cur: ConcreteState | None = None, result=None,
              head: ConcreteState | None = None, entry: ConcreteState | None = None,
              fill: int | None = None, oob: list | None = None):
    """Atom valuation: entry symbols from ``inp``, cells from ``cur``,
    loop-head and loop-entry symbols from the given snapshots.

    Out-of-bounds cells raise EvalError, or read as ``fill`` when it is given
    (each such read is noted in ``oob``).
    """
    def cell(arr, base, k):
        if 0 <= k < len(arr):
            return arr[k]
        if fill is None:
            raise EvalError(f"{base}[{k}]")
        if oob is not None:
            oob.append((base, k))
        return fill

    def val(a):
        if isinstance(a, SymVal):
            if a.kind == ENTRY:
                return inp.ints[a.name]
            if a.kind == LENGTH:
                return len(inp.arrays[a.name])
            if a.kind == LOOPHEAD and head is not None:
                return head.ints[a.name]
            if a.kind == LOOPENTRY and entry is not None:
                return entry.ints[a.name]
            raise KeyError(a)
        if isinstance(a, OpaqueRead) and a.gen == 0:
            return cell(inp.arrays[a.base], a.base, a.offset.evaluate(val))
        if isinstance(a, Cell) and cur is not None:
            return cell(cur.arrays[a.base], a.base, a.offset.evaluate(val))
        if isinstance(a, ResultAtom) and result is not None:
            return result
        raise KeyError(a)
    return val


def holds(f, *snapshots) -> bool:
    """Truth of ``f`` under ``valuation(*snapshots)``, for every value of the
    out-of-bounds cells it reads."""
    for fill in OOB_FILLERS:
        oob: list = []
        if not evaluate(f, valuation(*snapshots, fill=fill, oob=oob)):
            return False
        if not oob:
            return True
    return True


def cells(ranges, val) -> set:
    out = set()
    for base, lo, hi in ranges:
        a, b = SymExpr.lift(lo).evaluate(val), SymExpr.lift(hi).evaluate(val)
        out |= {(base, k) for k in range(a, b)}
    return out


def changed_cells(before: ConcreteState, after: ConcreteState) -> set:
    out = set()
    for a, xs in before.arrays.items():
        ys = after.arrays[a]
        out |= {(a, k) for k in range(len(xs)) if xs[k] != ys[k]}
    return out


@dataclass
class Run:
    input: ConcreteState
    final: ConcreteState
    result: int | None
    trace: list


def record_runs(fd, inputs, funcs=None, fuel=DEFAULT_FUEL):
    """Interpret every input once; returns (runs, skipped counts).

    Runs that leave an array or exhaust the fuel are outside the validated
    model and only counted.
    """
    runs, skipped = [], {"out_of_bounds": 0, "non_termination": 0}
    for inp in inputs:
        try:
            final, result, trace = interpret(fd, inp, fuel, funcs)
        except OutOfBounds:
            skipped["out_of_bounds"] += 1
            continue
        except NonTermination:
            skipped["non_termination"] += 1
            continue
        runs.append(Run(inp, final, result, trace))
    return runs, skipped


def check_run(contract, run: Run, loops: bool = True) -> list:
    """Failures ``[(check, detail)]`` of ``contract`` on one recorded run."""
    inp, final, result = run.input, run.final, run.result
    out = []
    val = valuation(inp, final, result, fill=0)
    if not any(holds(d, inp, final, result) for d in contract.post):
        out.append(("post", f"no disjunct holds (result={result}, final={final.as_dict()})"))
    allowed = cells([(r.array, r.start, r.end) for r in contract.assigns], val)
    extra = changed_cells(inp, final) - allowed
    if extra:
        out.append(("assigns", f"cells outside assigns changed: {sorted(extra)}"))
    if loops:
        blocks = {lb.loop_id: lb for lb in contract.loops}
        for ev in run.trace:
            lb = blocks.get(ev.loop_id)
            if lb is None:
                continue
            snap = (inp, ev.snapshot, None, ev.snapshot, ev.entry)
            hv = valuation(*snap, fill=0)
            for text, f in zip(lb.invariants, lb.formulas):
                if not holds(f, *snap):
                    out.append(("loop_invariant",
                                f"line {lb.line} iteration {ev.iteration}: {text}"))
            moved = changed_cells(ev.entry, ev.snapshot) - cells(lb.ranges, hv)
            if moved:
                out.append(("loop_assigns", f"line {lb.line}: {sorted(moved)}"))
    return out


def check_runs(contract, runs, skipped=None, max_failures: int = 20,
               stop_early: bool = False) -> ValidationReport:
    rep = ValidationReport()
    for run in runs:
        rep.inputs_tested += 1
        for check, detail in check_run(contract, run):
            if len(rep.failures) < max_failures:
                rep.failures.append({"input": run.input.as_dict(), "check": check,
                                     "detail": detail})
            elif len(rep.failures) == max_failures:
                rep.failures.append({"input": None, "check": "truncated",
                                     "detail": "further failures omitted"})
        if stop_early and rep.failures:
            break
    for k, n in (skipped or {}).items():
        if n:
            rep.warnings.append(f"{n} runs excluded ({k.replace('_', ' ')})")
    return rep


def validate_contract(fd, contract, inputs, funcs=None, fuel=DEFAULT_FUEL,
                      max_failures: int = 20) -> ValidationReport:
    """Check ``contract`` on every input: Post, assigns, loop invariants and loop assigns."""
    runs, skipped = record_runs(fd, inputs, funcs, fuel)
    return check_runs(contract, runs, skipped, max_failures)
