"""Shared helpers: corpus loading and one-call analysis of a source text."""

from __future__ import annotations

import dataclasses
import functools

import pytest

from acse import contracts as CT
from acse import executor as E
from acse import frontend as F
from acse import oracle as O
from acse.cli import bundled_corpus

CORPUS = bundled_corpus()
CORPUS_FILES = sorted(CORPUS.glob("*.c"))


@dataclasses.dataclass
class Analysis:
    funcs: dict
    fd: F.FunctionDef  # as parsed
    pfd: F.FunctionDef  # validated, calls inlined
    ctx: object
    paths: list
    contract: CT.Contract


def analyze(text: str, name: str | None = None, plugins=None, budget=E.DEFAULT_BUDGET) -> Analysis:
    funcs = {f.name: f for f in F.parse_source(text)}
    fd = funcs[name] if name else list(funcs.values())[-1]
    pfd = F.prepare(fd, funcs)
    ctx, paths = E.run(pfd, plugins=plugins, budget=budget)
    return Analysis(funcs, fd, pfd, ctx, paths, CT.synthesize(ctx, paths))


@functools.lru_cache(maxsize=None)
def corpus_analysis(stem: str) -> Analysis:
    return analyze((CORPUS / f"{stem}.c").read_text())


def corpus_text(stem: str) -> str:
    return (CORPUS / f"{stem}.c").read_text()


def squash(s: str) -> str:
    return "".join(s.split())


def strip_positions(n):
    """Copy of an AST with line/offset bookkeeping zeroed, for structural comparison."""
    if isinstance(n, (tuple, list)):
        return type(n)(strip_positions(x) for x in n)
    if dataclasses.is_dataclass(n) and not isinstance(n, type):
        kw = {}
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            if f.name in ("line", "pos", "start", "annot_span", "origin"):
                v = f.default if f.default is not dataclasses.MISSING else None
            kw[f.name] = strip_positions(v)
        return type(n)(**kw)
    return n


@pytest.fixture
def searchzero() -> Analysis:
    return corpus_analysis("searchzero")


def validate(an: Analysis, domain=None, **kw):
    """Exhaustive (or sampled) oracle check of the analysis contract."""
    dom = domain or O.DEFAULT_DOMAIN
    ins = O.gen_inputs(an.pfd, an.pfd.declared_pre, domain=dom, **kw)
    return O.validate_contract(an.pfd, an.contract, ins)


# acceptance criterion -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (title, ok, detail)
    print(f"criterion {criterion} ({title}): {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'} - {detail}")
