"""Command-line driver: analyze files, validate contracts, run a corpus."""

from __future__ import annotations

import argparse
import json
import logging
import signal
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import acsl, contracts, executor, oracle
from . import frontend as F
from .loopanalysis import DEFAULT_PLUGINS, NonTerminating

log = logging.getLogger("acse")

FULL, PARTIAL, FAIL, TIMEOUT = "Full", "Partial", "Fail", "Timeout"
EXIT_OK, EXIT_OTHER, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_EXPLOSION = 0, 1, 2, 3, 4


class AnalysisTimeout(Exception):
    pass


@contextmanager
def time_limit(seconds: float | None):
    """Raise AnalysisTimeout after ``seconds`` (main thread only; no-op otherwise)."""
    if not seconds or seconds <= 0 or not hasattr(signal, "setitimer"):
        yield
        return

    def on_alarm(signum, frame):
        raise AnalysisTimeout()
    try:
        old = signal.signal(signal.SIGALRM, on_alarm)
    except ValueError:  # not in the main thread
        yield
        return
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


@dataclass
class Options:
    function: str | None = None
    pre: str | None = None
    plugins: tuple = DEFAULT_PLUGINS
    path_budget: int = executor.DEFAULT_BUDGET
    validate: str = "exhaustive"
    dump_paths: bool = False
    timeout: float = 10.0


@dataclass
class FunctionResult:
    function: str
    status: str
    reason: str = ""
    gen_ms: float | None = None
    contract: contracts.Contract | None = None
    report: oracle.ValidationReport | None = None
    exit_code: int = EXIT_OK
    paths_dump: str = ""

    def to_json(self) -> dict:
        out = {"function": self.function, "status": self.status, "reason": self.reason,
               "generation_ms": self.gen_ms}
        if self.contract is not None:
            out["contract"] = self.contract.to_json()
        if self.report is not None:
            out["validation"] = self.report.to_json()
        return out


@dataclass
class FileResult:
    path: str
    functions: list = field(default_factory=list)
    annotated: str | None = None
    exit_code: int = EXIT_OK
    error: str = ""

    def to_json(self) -> dict:
        return {"schema": 1, "file": self.path, "error": self.error,
                "functions": [r.to_json() for r in self.functions]}


def parse_validate(spec: str):
    """``exhaustive`` | ``random:N`` | ``off`` -> (mode, samples)."""
    if spec in ("exhaustive", "off"):
        return spec, 0
    if spec.startswith("random:"):
        n = int(spec.split(":", 1)[1])
        if n <= 0:
            raise ValueError("random sample count must be positive")
        return "random", n
    raise ValueError(f"bad --validate value {spec!r}")


def inputs_for(fd, pre, mode: str, samples: int):
    if mode == "random":
        return oracle.gen_inputs(fd, pre, samples=samples, mode="random")
    return oracle.gen_inputs(fd, pre, budget=50_000, samples=3_000)


def analyze_function(fd: F.FunctionDef, funcs: dict, opts: Options) -> FunctionResult:
    name = fd.name
    try:
        prepared = F.prepare(fd, funcs)
    except F.UnsupportedConstruct as e:
        return FunctionResult(name, FAIL, f"UnsupportedConstruct({e.kind})", exit_code=EXIT_UNSUPPORTED)
    pre_node, pre_text = fd.declared_pre, fd.pre_text
    if opts.pre is not None:
        pre_node, pre_text = F.parse_condition(opts.pre), opts.pre
    try:
        t0 = time.perf_counter()
        ctx, paths = executor.run(prepared, pre_node, opts.plugins, opts.path_budget)
        c = contracts.synthesize(ctx, paths, pre_text)
        gen_ms = (time.perf_counter() - t0) * 1000.0
    except executor.PathExplosion as e:
        return FunctionResult(name, FAIL, f"PathExplosion({e.count})", exit_code=EXIT_EXPLOSION)
    except NonTerminating as e:
        return FunctionResult(name, FAIL, f"NonTermination(line {e.line})", exit_code=EXIT_OTHER)
    except executor.EmptyConfiguration as e:
        return FunctionResult(name, FAIL, f"EmptyConfiguration({e})", exit_code=EXIT_OTHER)
    except F.UnsupportedConstruct as e:
        return FunctionResult(name, FAIL, f"UnsupportedConstruct({e.kind})", exit_code=EXIT_UNSUPPORTED)
    res = FunctionResult(name, FULL if c.residuals == 0 else PARTIAL, gen_ms=gen_ms, contract=c)
    if c.residuals:
        res.reason = f"{c.residuals} unprojected conjuncts dropped"
    if opts.dump_paths:
        res.paths_dump = executor.dump_paths(paths)
    mode, samples = parse_validate(opts.validate)
    if mode != "off":
        try:
            rep = oracle.validate_contract(prepared, c, inputs_for(prepared, pre_node, mode, samples))
        except oracle.PreconditionUnsatisfiable:
            rep = oracle.ValidationReport(warnings=["no input in the test domain satisfies the precondition"])
        res.report = rep
        if rep.failures:
            res.status = PARTIAL
            res.reason = f"{len(rep.failures)} oracle failures"
    return res


def analyze_text(text: str, path: str = "<input>", opts: Options | None = None) -> FileResult:
    opts = opts or Options()
    fr = FileResult(path)
    try:
        funcs = F.parse_source(text)
    except (F.LexError, F.ParseError) as e:
        fr.exit_code, fr.error = EXIT_PARSE, f"ParseError: {e}"
        return fr
    except F.UnsupportedConstruct as e:
        fr.exit_code, fr.error = EXIT_UNSUPPORTED, f"UnsupportedConstruct({e.kind})"
        fr.functions.append(FunctionResult(Path(path).stem, FAIL, fr.error, exit_code=EXIT_UNSUPPORTED))
        return fr
    table = {f.name: f for f in funcs}
    targets = funcs
    if opts.function is not None:
        targets = [f for f in funcs if f.name == opts.function]
        if not targets:
            fr.exit_code, fr.error = EXIT_OTHER, f"no function named {opts.function!r}"
            return fr
    for fd in targets:
        try:
            with time_limit(opts.timeout):
                r = analyze_function(fd, table, opts)
        except AnalysisTimeout:
            r = FunctionResult(fd.name, TIMEOUT, f"exceeded {opts.timeout:g} s", exit_code=EXIT_EXPLOSION)
        fr.functions.append(r)
    codes = [r.exit_code for r in fr.functions if r.exit_code]
    for code in (EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_EXPLOSION, EXIT_OTHER):
        if code in codes:
            fr.exit_code = code
            break
    made = [r.contract for r in fr.functions if r.contract is not None]
    fr.annotated = acsl.annotate(text, made) if made else None
    return fr


def status_line(r: FunctionResult) -> str:
    s = f"{r.function}: {r.status}"
    if r.reason:
        s += f" ({r.reason})"
    if r.gen_ms is not None:
        s += f" [{r.gen_ms:.1f} ms]"
    return s


# ---------------------------------------------------------------- commands

def cmd_analyze(args, opts: Options) -> int:
    p = Path(args.file)
    fr = analyze_text(p.read_text(), str(p), opts)
    if fr.annotated is not None:
        p.with_name(p.name + ".annotated.c").write_text(fr.annotated)
    p.with_name(p.name + ".contract.json").write_text(json.dumps(fr.to_json(), indent=2))
    _emit(fr, args.json)
    return fr.exit_code


def cmd_validate(args, opts: Options) -> int:
    p = Path(args.file)
    fr = analyze_text(p.read_text(), str(p), opts)
    reports = {r.function: (r.report.to_json() if r.report else None) for r in fr.functions}
    if args.json:
        print(json.dumps(reports, indent=2))
    else:
        for r in fr.functions:
            n = r.report.inputs_tested if r.report else 0
            k = len(r.report.failures) if r.report else 0
            print(f"{r.function}: {n} inputs tested, {k} failures")
            for f in (r.report.failures if r.report else []):
                print(f"  [{f['check']}] {f['detail']} on {f['input']}")
    if fr.exit_code:
        return fr.exit_code
    return EXIT_OTHER if any(r.report and r.report.failures for r in fr.functions) else EXIT_OK


def _emit(fr: FileResult, as_json: bool):
    if as_json:
        print(json.dumps(fr.to_json(), indent=2))
        return
    if fr.error:
        print(f"{fr.path}: {fr.error}")
    for r in fr.functions:
        print(status_line(r))
        if r.paths_dump:
            print(r.paths_dump)


def _corpus_job(item):
    path, opts = item
    text = Path(path).read_text()
    t0 = time.perf_counter()
    try:
        with time_limit(opts.timeout):
            fr = analyze_text(text, path, Options(**{**opts.__dict__, "timeout": 0}))
    except AnalysisTimeout:
        fr = FileResult(path, [FunctionResult(Path(path).stem, TIMEOUT,
                                              f"exceeded {opts.timeout:g} s")], exit_code=EXIT_EXPLOSION)
    except Exception as e:  # one file must never abort the batch
        fr = FileResult(path, [FunctionResult(Path(path).stem, FAIL, f"{type(e).__name__}: {e}")],
                        exit_code=EXIT_OTHER)
    wall = (time.perf_counter() - t0) * 1000.0
    return fr, wall


def run_corpus(directory: Path, opts: Options, workers: int = 1) -> dict:
    files = sorted(str(p) for p in directory.glob("*.c") if not p.name.endswith(".annotated.c"))
    jobs = [(f, opts) for f in files]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_corpus_job, jobs))
    else:
        results = [_corpus_job(j) for j in jobs]
    rows = []
    for fr, wall in results:
        if fr.error and not fr.functions:
            rows.append({"file": Path(fr.path).name, "function": "-", "status": FAIL,
                         "reason": fr.error, "generation_ms": None, "inputs": 0, "failures": 0})
        for r in fr.functions:
            rows.append({"file": Path(fr.path).name, "function": r.function, "status": r.status,
                         "reason": r.reason, "generation_ms": r.gen_ms,
                         "inputs": r.report.inputs_tested if r.report else 0,
                         "failures": len(r.report.failures) if r.report else 0})
    counts = {s: sum(1 for r in rows if r["status"] == s) for s in (FULL, PARTIAL, FAIL, TIMEOUT)}
    gen = [r["generation_ms"] for r in rows if r["generation_ms"] is not None]
    summary = {"rows": len(rows), **counts,
               "avg_generation_ms": statistics.fmean(gen) if gen else None,
               "median_generation_ms": statistics.median(gen) if gen else None}
    return {"schema": 1, "directory": str(directory), "results": rows, "summary": summary}


def format_table(report: dict) -> str:
    head = f"{'file':<24} {'function':<20} {'status':<8} {'gen ms':>8} {'inputs':>7} {'fail':>5}"
    lines = [head, "-" * len(head)]
    for r in report["results"]:
        ms = "-" if r["generation_ms"] is None else f"{r['generation_ms']:.1f}"
        lines.append(f"{r['file']:<24} {r['function']:<20} {r['status']:<8} {ms:>8} "
                     f"{r['inputs']:>7} {r['failures']:>5}")
    s = report["summary"]
    avg = "-" if s["avg_generation_ms"] is None else f"{s['avg_generation_ms']:.1f} ms"
    lines.append("-" * len(head))
    lines.append(f"Full {s[FULL]}  Partial {s[PARTIAL]}  Fail {s[FAIL]}  Timeout {s[TIMEOUT]}  "
                 f"avg generation (generated cases) {avg}")
    return "\n".join(lines)


def bundled_corpus() -> Path:
    return Path(str(resources.files("acse") / "corpus"))


def cmd_corpus(args, opts: Options) -> int:
    d = Path(args.dir) if args.dir else bundled_corpus()
    report = run_corpus(d, opts, args.workers)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(format_table(report))
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--function", metavar="NAME")
    common.add_argument("--pre", metavar="EXPR", help="precondition overriding the declared one")
    common.add_argument("--plugins", default=",".join(DEFAULT_PLUGINS),
                        help="comma-separated plugin list (default: %(default)s)")
    common.add_argument("--path-budget", type=int, default=executor.DEFAULT_BUDGET)
    common.add_argument("--validate", default="exhaustive",
                        help="exhaustive | random:N | off (default: %(default)s)")
    common.add_argument("--dump-paths", action="store_true")
    common.add_argument("--json", action="store_true")
    common.add_argument("--timeout", type=float, default=10.0, help="seconds per function/file")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="acse", description="Contract synthesis for a small C subset "
                                 "by symbolic execution over array segments.")
    sub = ap.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", parents=[common], help="synthesize contracts for a file")
    a.add_argument("file")
    v = sub.add_parser("validate", parents=[common], help="synthesize and check contracts")
    v.add_argument("file")
    c = sub.add_parser("corpus", parents=[common], help="run every .c file of a directory")
    c.add_argument("dir", nargs="?", help="directory (default: bundled corpus)")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--report", metavar="FILE", help="also write the JSON report here")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        parse_validate(args.validate)
        plugins = tuple(p.strip() for p in args.plugins.split(",") if p.strip())
        from .loopanalysis import registry
        registry(plugins)
    except ValueError as e:
        print(f"acse: {e}", file=sys.stderr)
        return EXIT_OTHER
    opts = Options(args.function, args.pre, plugins, args.path_budget, args.validate,
                   args.dump_paths, args.timeout)
    cmd = {"analyze": cmd_analyze, "validate": cmd_validate, "corpus": cmd_corpus}[args.command]
    try:
        return cmd(args, opts)
    except OSError as e:
        print(f"acse: {e}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
