"""Lexer, parser, validator and pretty-printer for the mini-C input language.

Accepted: ``int``/``void`` functions with ``int``, ``int *`` and ``int x[]``
parameters, local ``int`` declarations, assignment, ``x++``/``x--``, ``if``,
``while``, ``for`` (desugared to ``while``), ``break``, ``return`` and calls
to functions defined in the same file.  A ``/*@ requires P; */`` comment right
before a function supplies its precondition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterator


class FrontendError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col, self.message = line, col, message


class LexError(FrontendError):
    pass


class ParseError(FrontendError):
    pass


class UnsupportedConstruct(Exception):
    """The function uses a construct outside the analyzable subset."""

    def __init__(self, kind: str, line: int = 0, detail: str = ""):
        super().__init__(f"{kind} at line {line}" + (f": {detail}" if detail else ""))
        self.kind, self.line, self.detail = kind, line, detail


# ---------------------------------------------------------------- tokens

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    pos: int = 0

    def __repr__(self):
        return f"{self.kind}({self.text})" if self.kind in ("Ident", "Int") else self.kind


KEYWORDS = {
    "int": "KwInt", "void": "KwVoid", "if": "If", "else": "Else", "while": "While",
    "for": "For", "return": "Return", "break": "Break",
}

# longest first
PUNCT = [
    ("<<=", "Reserved"), (">>=", "Reserved"),
    ("++", "PlusPlus"), ("--", "MinusMinus"), ("<=", "Le"), (">=", "Ge"), ("==", "EqEq"),
    ("!=", "Ne"), ("&&", "AndAnd"), ("||", "OrOr"), ("<<", "Reserved"), (">>", "Reserved"),
    ("+=", "Reserved"), ("-=", "Reserved"), ("*=", "Reserved"), ("/=", "Reserved"),
    ("%=", "Reserved"), ("..", "DotDot"),
    ("+", "Plus"), ("-", "Minus"), ("*", "Star"), ("<", "Lt"), (">", "Gt"), ("=", "Assign"),
    ("!", "Not"), ("(", "LParen"), (")", "RParen"), ("{", "LBrace"), ("}", "RBrace"),
    ("[", "LBracket"), ("]", "RBracket"), (";", "Semi"), (",", "Comma"),
    ("/", "Reserved"), ("%", "Reserved"), ("&", "Reserved"), ("|", "Reserved"),
    ("^", "Reserved"), ("~", "Reserved"),
]

_WS = re.compile(r"[ \t\r\n]+")
_IDENT = re.compile(r"\\?[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")


def tokenize(text: str) -> list[Token]:
    """Tokens of ``text``.  ``/*@ ... */`` blocks become a single ``Annot`` token;
    operators outside the grammar become ``Reserved`` tokens that the parser
    rejects as unsupported constructs."""
    toks: list[Token] = []
    i, line, lstart = 0, 1, 0
    n = len(text)
    while i < n:
        col = i - lstart + 1
        m = _WS.match(text, i)
        if m:
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                lstart = i + chunk.rfind("\n") + 1
            i = m.end()
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise LexError(line, col, "unterminated comment")
            body = text[i + 2:end]
            if body.startswith("@"):
                toks.append(Token("Annot", body[1:], line, col, i))
            nl = body.count("\n")
            if nl:
                line += nl
                lstart = i + 2 + body.rfind("\n") + 1
            i = end + 2
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            i = n if end < 0 else end
            continue
        if text[i] == "#":
            raise LexError(line, col, "preprocessor directives are not supported")
        m = _INT.match(text, i)
        if m:
            toks.append(Token("Int", m.group(), line, col, i))
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(Token(KEYWORDS.get(word, "Ident"), word, line, col, i))
            i = m.end()
            continue
        for p, kind in PUNCT:
            if text.startswith(p, i):
                toks.append(Token(kind, p, line, col, i))
                i += len(p)
                break
        else:
            raise LexError(line, col, f"unexpected character {text[i]!r}")
    toks.append(Token("EOF", "", line, i - lstart + 1, n))
    return toks


# ---------------------------------------------------------------- AST

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class IntConst(Node):
    value: int


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # '+', '-', '*'
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class ArrayAccess(Node):
    array: str
    index: Node


@dataclass(frozen=True)
class CallExpr(Node):
    fname: str
    args: tuple


@dataclass(frozen=True)
class Cmp(Node):
    op: str  # '<=', '<', '>=', '>', '!=', '=='
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Not(Node):
    arg: Node


@dataclass(frozen=True)
class And(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Or(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class Valid(Node):
    """``\\valid(a + (lo .. hi))`` / ``\\valid_read(...)`` in a precondition."""
    array: str
    lo: Node
    hi: Node
    read: bool = False


@dataclass(frozen=True)
class VarAssign(Node):
    name: str
    expr: Node
    line: int = 0


@dataclass(frozen=True)
class ArrAssign(Node):
    array: str
    index: Node
    expr: Node
    line: int = 0


@dataclass(frozen=True)
class If(Node):
    cond: Node
    then: Node
    els: Node
    line: int = 0


@dataclass(frozen=True)
class While(Node):
    cond: Node
    body: Node
    line: int = 0
    origin: str = ""  # function whose source holds the loop
    pos: int = 0  # char offset of the loop keyword


@dataclass(frozen=True)
class Seq(Node):
    items: tuple = ()


@dataclass(frozen=True)
class Return(Node):
    expr: Node | None
    line: int = 0


@dataclass(frozen=True)
class Break(Node):
    line: int = 0


@dataclass(frozen=True)
class CallStmt(Node):
    target: str | None
    fname: str
    args: tuple
    line: int = 0


@dataclass(frozen=True)
class Decl(Node):
    """Local declaration; ``init`` may be None."""
    name: str
    init: Node | None
    line: int = 0


INT, ARRAY = "int", "int-array"


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple  # ((name, kind), ...)
    body: Node
    ret: str = "int"
    declared_pre: Node | None = None
    pre_text: str | None = None
    line: int = 0
    start: int = 0  # char offset of the function header (after any annotation)
    annot_span: tuple | None = None  # (start, end) of the leading /*@ ... */ block

    @property
    def param_names(self):
        return [p for p, _ in self.params]

    def arrays(self):
        return [p for p, k in self.params if k == ARRAY]

    def ints(self):
        return [p for p, k in self.params if k == INT]


# ---------------------------------------------------------------- parser

class Parser:
    def __init__(self, toks: list[Token], text: str = ""):
        self.toks = toks
        self.i = 0
        self.text = text

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, *kinds) -> bool:
        return self.tok.kind in kinds

    def expect(self, kind: str) -> Token:
        t = self.tok
        if t.kind == "Reserved":
            raise UnsupportedConstruct("Operator", t.line, t.text)
        if t.kind != kind:
            raise ParseError(t.line, t.col, f"expected {kind}, got {t.kind} {t.text!r}")
        return self.next()

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            return self.next()
        return None

    # -- program
    def program(self) -> list[FunctionDef]:
        out = []
        while not self.at("EOF"):
            annot = None
            while self.at("Annot"):
                annot = self.next()
            if self.at("EOF"):
                break
            out.append(self.function(annot))
        return out

    def function(self, annot: Token | None) -> FunctionDef:
        start_tok = self.tok
        if self.accept("KwVoid"):
            ret = "void"
        else:
            self.expect("KwInt")
            ret = "int"
        name = self.expect("Ident").text
        self.expect("LParen")
        params = []
        if self.at("KwVoid") and self.peek().kind == "RParen":
            self.next()
        elif not self.at("RParen"):
            while True:
                params.append(self.param())
                if not self.accept("Comma"):
                    break
        self.expect("RParen")
        body = self.block()
        pre = pre_text = span = None
        if annot is not None:
            pre, pre_text = parse_requires(annot)
            end = self.text.find("*/", annot.pos) + 2 if self.text else annot.pos
            span = (annot.pos, end)
        return FunctionDef(name, tuple(params), body, ret, pre, pre_text,
                           start_tok.line, start_tok.pos, span)

    def param(self):
        self.expect("KwInt")
        if self.accept("Star"):
            return (self.expect("Ident").text, ARRAY)
        name = self.expect("Ident").text
        if self.accept("LBracket"):
            if self.at("Int"):
                self.next()
            self.expect("RBracket")
            return (name, ARRAY)
        return (name, INT)

    def block(self) -> Node:
        self.expect("LBrace")
        items = []
        while not self.at("RBrace"):
            if self.at("EOF"):
                raise ParseError(self.tok.line, self.tok.col, "unexpected end of input")
            items.extend(self.statement_list())
        self.expect("RBrace")
        return Seq(tuple(items))

    def statement_list(self) -> list[Node]:
        """A statement; declarations with several declarators yield several nodes."""
        t = self.tok
        if t.kind == "Annot":
            self.next()  # loop annotations in the input are ignored
            return []
        if t.kind == "KwInt":
            self.next()
            if self.at("Star"):
                raise UnsupportedConstruct("LocalPointer", t.line)
            out = []
            while True:
                nt = self.expect("Ident")
                if self.at("LBracket"):
                    raise UnsupportedConstruct("LocalArray", nt.line)
                init = None
                if self.accept("Assign"):
                    if self.at("Ident") and self.peek().kind == "LParen":
                        c = self.call()
                        out.append(Decl(nt.text, None, nt.line))
                        out.append(CallStmt(nt.text, c.fname, c.args, nt.line))
                    else:
                        init = self.expr()
                        out.append(Decl(nt.text, init, nt.line))
                else:
                    out.append(Decl(nt.text, None, nt.line))
                if not self.accept("Comma"):
                    break
            self.expect("Semi")
            return out
        return [self.statement()]

    def statement(self) -> Node:
        t = self.tok
        if t.kind == "LBrace":
            return self.block()
        if t.kind == "Semi":
            self.next()
            return Seq(())
        if t.kind == "Annot":
            self.next()  # loop annotations in the input are ignored
            return Seq(())
        if t.kind == "If":
            self.next()
            self.expect("LParen")
            c = self.cond()
            self.expect("RParen")
            th = self.statement()
            el = Seq(())
            if self.accept("Else"):
                el = self.statement()
            return If(c, th, el, t.line)
        if t.kind == "While":
            self.next()
            self.expect("LParen")
            c = self.cond()
            self.expect("RParen")
            return While(c, self.statement(), t.line, pos=t.pos)
        if t.kind == "For":
            return self.for_stmt()
        if t.kind == "Return":
            self.next()
            e = None if self.at("Semi") else self.expr()
            self.expect("Semi")
            return Return(e, t.line)
        if t.kind == "Break":
            self.next()
            self.expect("Semi")
            return Break(t.line)
        if t.kind == "KwInt":
            items = self.statement_list()
            return items[0] if len(items) == 1 else Seq(tuple(items))
        s = self.simple()
        self.expect("Semi")
        return s

    def for_stmt(self) -> Node:
        t = self.next()
        self.expect("LParen")
        init: list[Node] = []
        if self.at("KwInt"):
            init = self.statement_list()  # consumes ';'
        else:
            if not self.at("Semi"):
                init = [self.simple()]
            self.expect("Semi")
        cond = BoolLit(True) if self.at("Semi") else self.cond()
        self.expect("Semi")
        step = Seq(()) if self.at("RParen") else self.simple()
        self.expect("RParen")
        body = self.statement()
        loop = While(cond, Seq((body, step)), t.line, pos=t.pos)
        return Seq(tuple(init) + (loop,))

    def simple(self) -> Node:
        """Assignment, increment or call statement (no trailing ';')."""
        t = self.tok
        if t.kind in ("PlusPlus", "MinusMinus"):
            self.next()
            name = self.expect("Ident").text
            op = "+" if t.kind == "PlusPlus" else "-"
            return VarAssign(name, BinOp(op, Var(name), IntConst(1)), t.line)
        name_tok = self.expect("Ident")
        name = name_tok.text
        if self.at("LParen"):
            self.i -= 1
            c = self.call()
            return CallStmt(None, c.fname, c.args, t.line)
        if self.accept("LBracket"):
            idx = self.expr()
            self.expect("RBracket")
            if self.at("Reserved"):
                raise UnsupportedConstruct("CompoundAssignment", self.tok.line, self.tok.text)
            self.expect("Assign")
            return ArrAssign(name, idx, self.expr(), t.line)
        if self.at("PlusPlus", "MinusMinus"):
            op = "+" if self.next().kind == "PlusPlus" else "-"
            return VarAssign(name, BinOp(op, Var(name), IntConst(1)), t.line)
        if self.at("Reserved"):
            raise UnsupportedConstruct("CompoundAssignment", self.tok.line, self.tok.text)
        self.expect("Assign")
        if self.at("Ident") and self.peek().kind == "LParen":
            c = self.call()
            return CallStmt(name, c.fname, c.args, t.line)
        return VarAssign(name, self.expr(), t.line)

    def call(self) -> CallExpr:
        name = self.expect("Ident").text
        self.expect("LParen")
        args = []
        if not self.at("RParen"):
            while True:
                args.append(self.expr())
                if not self.accept("Comma"):
                    break
        self.expect("RParen")
        return CallExpr(name, tuple(args))

    # -- boolean expressions
    def cond(self) -> Node:
        left = self.cond_and()
        while self.accept("OrOr"):
            left = Or(left, self.cond_and())
        return left

    def cond_and(self) -> Node:
        left = self.cond_not()
        while self.accept("AndAnd"):
            left = And(left, self.cond_not())
        return left

    def cond_not(self) -> Node:
        if self.accept("Not"):
            return Not(self.cond_not())
        if self.at("LParen"):
            # parenthesised condition or parenthesised arithmetic operand
            save = self.i
            self.next()
            try:
                c = self.cond()
                self.expect("RParen")
                if not self.at("Lt", "Le", "Gt", "Ge", "EqEq", "Ne", "Plus", "Minus", "Star"):
                    return c
            except (ParseError, UnsupportedConstruct):
                pass
            self.i = save
        if self.at("Ident") and self.tok.text in ("\\true", "\\false"):
            return BoolLit(self.next().text == "\\true")
        if self.at("Ident") and self.tok.text in ("\\valid", "\\valid_read"):
            return self.valid()
        lhs = self.expr()
        ops = {"Lt": "<", "Le": "<=", "Gt": ">", "Ge": ">=", "EqEq": "==", "Ne": "!="}
        if self.tok.kind in ops:
            op = ops[self.next().kind]
            rhs = self.expr()
            # chained comparison  a <= b < c
            if self.tok.kind in ops:
                op2 = ops[self.next().kind]
                rhs2 = self.expr()
                return And(Cmp(op, lhs, rhs), Cmp(op2, rhs, rhs2))
            return Cmp(op, lhs, rhs)
        if self.at("Reserved"):
            raise UnsupportedConstruct("Operator", self.tok.line, self.tok.text)
        # C truthiness: e  ==>  e != 0
        return Cmp("!=", lhs, IntConst(0))

    def valid(self) -> Node:
        kw = self.next().text
        self.expect("LParen")
        arr = self.expect("Ident").text
        self.expect("Plus")
        self.expect("LParen")
        lo = self.expr()
        self.expect("DotDot")
        hi = self.expr()
        self.expect("RParen")
        self.expect("RParen")
        return Valid(arr, lo, hi, kw == "\\valid_read")

    # -- arithmetic
    def expr(self) -> Node:
        left = self.term()
        while self.at("Plus", "Minus"):
            op = "+" if self.next().kind == "Plus" else "-"
            left = BinOp(op, left, self.term())
        if self.at("Reserved") and self.tok.text in ("<<", ">>", "&", "|", "^"):
            raise UnsupportedConstruct("Operator", self.tok.line, self.tok.text)
        return left

    def term(self) -> Node:
        left = self.factor()
        while True:
            if self.accept("Star"):
                left = BinOp("*", left, self.factor())
            elif self.at("Reserved") and self.tok.text in ("/", "%"):
                raise UnsupportedConstruct("Operator", self.tok.line, self.tok.text)
            else:
                return left

    def factor(self) -> Node:
        t = self.tok
        if t.kind == "Int":
            self.next()
            return IntConst(int(t.text))
        if t.kind == "Minus":
            self.next()
            f = self.factor()
            if isinstance(f, IntConst):
                return IntConst(-f.value)
            return BinOp("-", IntConst(0), f)
        if t.kind == "Plus":
            self.next()
            return self.factor()
        if t.kind == "LParen":
            self.next()
            e = self.expr()
            self.expect("RParen")
            return e
        if t.kind == "Ident":
            self.next()
            if t.text.startswith("\\"):
                raise ParseError(t.line, t.col, f"unsupported logic term {t.text}")
            if self.accept("LBracket"):
                idx = self.expr()
                self.expect("RBracket")
                return ArrayAccess(t.text, idx)
            if self.at("LParen"):
                raise UnsupportedConstruct("CallInExpression", t.line, t.text)
            return Var(t.text)
        if t.kind == "Reserved":
            raise UnsupportedConstruct("Operator", t.line, t.text)
        raise ParseError(t.line, t.col, f"unexpected {t.kind} {t.text!r}")


_REQ = re.compile(r"requires\s+(.*?);", re.S)


def parse_requires(annot: Token):
    """Precondition formula and its source text from a ``/*@ ... */`` token."""
    clauses = _REQ.findall(annot.text)
    if not clauses:
        return None, None
    nodes = []
    for c in clauses:
        toks = tokenize(c)
        p = Parser(toks)
        n = p.cond()
        if not p.at("EOF"):
            raise ParseError(annot.line, annot.col, f"trailing tokens in requires: {c!r}")
        nodes.append(n)
    node = nodes[0]
    for n in nodes[1:]:
        node = And(node, n)
    return node, " && ".join(" ".join(c.split()) for c in clauses)


def parse(tokens: list[Token], text: str = "") -> list[FunctionDef]:
    return Parser(tokens, text).program()


def parse_source(text: str) -> list[FunctionDef]:
    if not text.strip():
        raise ParseError(1, 1, "empty source file")
    return parse(tokenize(text), text)


def parse_condition(text: str) -> Node:
    p = Parser(tokenize(text))
    n = p.cond()
    if not p.at("EOF"):
        raise ParseError(p.tok.line, p.tok.col, "trailing tokens in condition")
    return n


# ---------------------------------------------------------------- traversal

def children(n: Node) -> tuple:
    if isinstance(n, Seq):
        return n.items
    if isinstance(n, If):
        return (n.cond, n.then, n.els)
    if isinstance(n, While):
        return (n.cond, n.body)
    if isinstance(n, (BinOp, Cmp, And, Or)):
        return (n.lhs, n.rhs)
    if isinstance(n, Not):
        return (n.arg,)
    if isinstance(n, ArrayAccess):
        return (n.index,)
    if isinstance(n, VarAssign):
        return (n.expr,)
    if isinstance(n, ArrAssign):
        return (n.index, n.expr)
    if isinstance(n, Return):
        return () if n.expr is None else (n.expr,)
    if isinstance(n, (CallStmt, CallExpr)):
        return n.args
    if isinstance(n, Decl):
        return () if n.init is None else (n.init,)
    if isinstance(n, Valid):
        return (n.lo, n.hi)
    return ()


def walk(n: Node) -> Iterator[Node]:
    yield n
    for c in children(n):
        yield from walk(c)


def _contains(n: Node, pred) -> bool:
    return any(pred(x) for x in walk(n))


def loops(n: Node) -> list[While]:
    """While nodes in pre-order; the index is the loop id."""
    return [x for x in walk(n) if isinstance(x, While)]


def assigned_vars(n: Node) -> set[str]:
    out = set()
    for x in walk(n):
        if isinstance(x, VarAssign):
            out.add(x.name)
        elif isinstance(x, Decl):
            out.add(x.name)
        elif isinstance(x, CallStmt) and x.target:
            out.add(x.target)
        elif isinstance(x, ArrAssign):
            out.add(x.array)
    return out


# ---------------------------------------------------------------- validation

def validate(fd: FunctionDef, funcs: dict[str, FunctionDef] | None = None) -> FunctionDef:
    """Reject what the analysis cannot handle; returns ``fd`` unchanged."""
    funcs = funcs or {fd.name: fd}
    names = [p for p, _ in fd.params]
    if len(set(names)) != len(names):
        raise UnsupportedConstruct("DuplicateParameter", fd.line)
    _check_nesting(fd.body, 0)
    _check_calls(fd, funcs, [])
    arrays = set(fd.arrays())
    scope = set(names)
    _check_scope(fd.body, scope, arrays, fd)
    for x in walk(fd.body):
        if isinstance(x, Return) and fd.ret == "void" and x.expr is not None:
            raise UnsupportedConstruct("ReturnValueInVoid", x.line)
    return fd


def _check_nesting(n: Node, depth: int):
    if isinstance(n, While):
        if depth > 0:
            raise UnsupportedConstruct("NestedLoop", n.line)
        _check_nesting(n.body, depth + 1)
        return
    if isinstance(n, Break) and depth == 0:
        raise UnsupportedConstruct("BreakOutsideLoop", n.line)
    for c in children(n):
        _check_nesting(c, depth)


def _check_calls(fd: FunctionDef, funcs, stack):
    if fd.name in stack:
        raise UnsupportedConstruct("Recursion", fd.line, " -> ".join(stack + [fd.name]))
    for x in walk(fd.body):
        if isinstance(x, CallStmt):
            callee = funcs.get(x.fname)
            if callee is None:
                raise UnsupportedConstruct("UnknownCallee", x.line, x.fname)
            if len(callee.params) != len(x.args):
                raise UnsupportedConstruct("ArityMismatch", x.line, x.fname)
            for (pname, kind), a in zip(callee.params, x.args):
                if kind == ARRAY and not isinstance(a, Var):
                    raise UnsupportedConstruct("PointerArithmetic", x.line, pname)
            if x.target and callee.ret == "void":
                raise UnsupportedConstruct("VoidResultUsed", x.line, x.fname)
            _check_returns_last(callee)
            _check_calls(callee, funcs, stack + [fd.name])
    if fd.name in [n for n in stack]:
        raise UnsupportedConstruct("Recursion", fd.line)


def _check_returns_last(fd: FunctionDef):
    """Inlined callees may only return as their final statement."""
    items = fd.body.items if isinstance(fd.body, Seq) else (fd.body,)
    for k, it in enumerate(items):
        last = k == len(items) - 1
        for x in walk(it):
            if isinstance(x, Return) and not (last and x is it):
                raise UnsupportedConstruct("EarlyReturnInCallee", x.line, fd.name)


def _check_scope(n: Node, scope: set, arrays: set, fd: FunctionDef):
    """Identifiers must be parameters or declared before use (source order)."""
    if isinstance(n, Seq):
        for it in n.items:
            _check_scope(it, scope, arrays, fd)
        return
    if isinstance(n, Decl):
        if n.init is not None:
            _check_scope(n.init, scope, arrays, fd)
        scope.add(n.name)
        return
    if isinstance(n, Var) and n.name not in scope:
        raise UnsupportedConstruct("UndeclaredIdentifier", fd.line, n.name)
    if isinstance(n, Var) and n.name in arrays:
        raise UnsupportedConstruct("ArrayAsScalar", fd.line, n.name)
    if isinstance(n, ArrayAccess) and n.array not in arrays:
        raise UnsupportedConstruct("NotAnArray", fd.line, n.array)
    if isinstance(n, ArrAssign) and n.array not in arrays:
        raise UnsupportedConstruct("NotAnArray", n.line, n.array)
    if isinstance(n, VarAssign):
        if n.name not in scope or n.name in arrays:
            raise UnsupportedConstruct("UndeclaredIdentifier", n.line, n.name)
    if isinstance(n, CallStmt) and n.target and n.target not in scope:
        raise UnsupportedConstruct("UndeclaredIdentifier", n.line, n.target)
    for c in children(n):
        _check_scope(c, scope, arrays, fd)


# ---------------------------------------------------------------- inlining

def inline_calls(fd: FunctionDef, funcs: dict[str, FunctionDef]) -> FunctionDef:
    """Replace call statements by callee bodies (callees inlined first).

    Integer arguments are copied into fresh locals, array arguments alias the
    caller's array by renaming, and a final ``return e`` becomes an assignment
    to the call target.
    """
    counter = [0]

    def inline_body(f: FunctionDef, tag: str) -> Node:
        return _rewrite(f.body, f.name, tag)

    def _rewrite(n: Node, owner: str, tag: str) -> Node:
        if isinstance(n, Seq):
            return Seq(tuple(_rewrite(i, owner, tag) for i in n.items))
        if isinstance(n, If):
            return If(n.cond, _rewrite(n.then, owner, tag), _rewrite(n.els, owner, tag), n.line)
        if isinstance(n, While):
            return While(n.cond, _rewrite(n.body, owner, tag), n.line, n.origin or owner, n.pos)
        if isinstance(n, CallStmt):
            callee = funcs[n.fname]
            counter[0] += 1
            k = counter[0]
            ren: dict[str, str] = {}
            pre: list[Node] = []
            for (pname, kind), a in zip(callee.params, n.args):
                if kind == ARRAY:
                    ren[pname] = a.name
                else:
                    nm = f"{callee.name}_{pname}_{k}"
                    ren[pname] = nm
                    pre.append(Decl(nm, a, n.line))
            for loc in assigned_vars(callee.body) - set(ren):
                ren[loc] = f"{callee.name}_{loc}_{k}"
            body = _rewrite(rename(callee.body, ren), callee.name, tag)
            items = list(body.items) if isinstance(body, Seq) else [body]
            if items and isinstance(items[-1], Return):
                r = items.pop()
                if n.target and r.expr is not None:
                    items.append(VarAssign(n.target, r.expr, n.line))
            return Seq(tuple(pre + items))
        return n

    body = _rewrite(fd.body, fd.name, "")
    return replace(fd, body=_flatten(body))


def rename(n: Node, ren: dict[str, str]) -> Node:
    r = lambda s: ren.get(s, s)  # noqa: E731
    if isinstance(n, Var):
        return Var(r(n.name))
    if isinstance(n, IntConst) or isinstance(n, BoolLit) or isinstance(n, Break):
        return n
    if isinstance(n, BinOp):
        return BinOp(n.op, rename(n.lhs, ren), rename(n.rhs, ren))
    if isinstance(n, ArrayAccess):
        return ArrayAccess(r(n.array), rename(n.index, ren))
    if isinstance(n, Cmp):
        return Cmp(n.op, rename(n.lhs, ren), rename(n.rhs, ren))
    if isinstance(n, Not):
        return Not(rename(n.arg, ren))
    if isinstance(n, And):
        return And(rename(n.lhs, ren), rename(n.rhs, ren))
    if isinstance(n, Or):
        return Or(rename(n.lhs, ren), rename(n.rhs, ren))
    if isinstance(n, VarAssign):
        return VarAssign(r(n.name), rename(n.expr, ren), n.line)
    if isinstance(n, ArrAssign):
        return ArrAssign(r(n.array), rename(n.index, ren), rename(n.expr, ren), n.line)
    if isinstance(n, If):
        return If(rename(n.cond, ren), rename(n.then, ren), rename(n.els, ren), n.line)
    if isinstance(n, While):
        return While(rename(n.cond, ren), rename(n.body, ren), n.line, n.origin, n.pos)
    if isinstance(n, Seq):
        return Seq(tuple(rename(i, ren) for i in n.items))
    if isinstance(n, Return):
        return Return(None if n.expr is None else rename(n.expr, ren), n.line)
    if isinstance(n, CallStmt):
        return CallStmt(None if n.target is None else r(n.target), n.fname,
                        tuple(rename(a, ren) for a in n.args), n.line)
    if isinstance(n, Decl):
        return Decl(r(n.name), None if n.init is None else rename(n.init, ren), n.line)
    if isinstance(n, Valid):
        return Valid(r(n.array), rename(n.lo, ren), rename(n.hi, ren), n.read)
    raise TypeError(n)


def _flatten(n: Node) -> Node:
    if isinstance(n, Seq):
        out = []
        for i in n.items:
            i = _flatten(i)
            if isinstance(i, Seq):
                out.extend(i.items)
            else:
                out.append(i)
        return Seq(tuple(out))
    if isinstance(n, If):
        return If(n.cond, _flatten(n.then), _flatten(n.els), n.line)
    if isinstance(n, While):
        return While(n.cond, _flatten(n.body), n.line, n.origin, n.pos)
    return n


def prepare(fd: FunctionDef, funcs: dict[str, FunctionDef]) -> FunctionDef:
    """Validate, inline calls and tag loops with their owning function."""
    validate(fd, funcs)
    out = inline_calls(fd, funcs)
    return out


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2}


def print_expr(n: Node, prec: int = 0) -> str:
    if isinstance(n, IntConst):
        return str(n.value) if n.value >= 0 or prec == 0 else f"({n.value})"
    if isinstance(n, Var):
        return n.name
    if isinstance(n, ArrayAccess):
        return f"{n.array}[{print_expr(n.index)}]"
    if isinstance(n, BinOp):
        p = _PREC[n.op]
        s = f"{print_expr(n.lhs, p)} {n.op} {print_expr(n.rhs, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(n, CallExpr):
        return f"{n.fname}({', '.join(print_expr(a) for a in n.args)})"
    raise TypeError(n)


def print_cond(n: Node, prec: int = 0) -> str:
    if isinstance(n, Cmp):
        return f"{print_expr(n.lhs)} {n.op} {print_expr(n.rhs)}"
    if isinstance(n, Not):
        return f"!({print_cond(n.arg)})"
    if isinstance(n, And):
        s = f"{print_cond(n.lhs, 2)} && {print_cond(n.rhs, 2)}"
        return f"({s})" if prec > 2 else s
    if isinstance(n, Or):
        s = f"{print_cond(n.lhs, 1)} || {print_cond(n.rhs, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(n, BoolLit):
        return "\\true" if n.value else "\\false"
    if isinstance(n, Valid):
        kw = "\\valid_read" if n.read else "\\valid"
        return f"{kw}({n.array} + ({print_expr(n.lo)} .. {print_expr(n.hi)}))"
    raise TypeError(n)


def print_stmt(n: Node, ind: int = 1) -> list[str]:
    pad = "  " * ind
    if isinstance(n, Seq):
        out = []
        for i in n.items:
            out.extend(print_stmt(i, ind))
        return out
    if isinstance(n, VarAssign):
        return [f"{pad}{n.name} = {print_expr(n.expr)};"]
    if isinstance(n, ArrAssign):
        return [f"{pad}{n.array}[{print_expr(n.index)}] = {print_expr(n.expr)};"]
    if isinstance(n, Decl):
        if n.init is None:
            return [f"{pad}int {n.name};"]
        return [f"{pad}int {n.name} = {print_expr(n.init)};"]
    if isinstance(n, If):
        out = [f"{pad}if ({print_cond(n.cond)}) {{"] + print_stmt(n.then, ind + 1)
        if not (isinstance(n.els, Seq) and not n.els.items):
            out += [f"{pad}}} else {{"] + print_stmt(n.els, ind + 1)
        return out + [f"{pad}}}"]
    if isinstance(n, While):
        return ([f"{pad}while ({print_cond(n.cond)}) {{"] + print_stmt(n.body, ind + 1)
                + [f"{pad}}}"])
    if isinstance(n, Return):
        return [f"{pad}return;" if n.expr is None else f"{pad}return {print_expr(n.expr)};"]
    if isinstance(n, Break):
        return [f"{pad}break;"]
    if isinstance(n, CallStmt):
        call = f"{n.fname}({', '.join(print_expr(a) for a in n.args)})"
        return [f"{pad}{n.target} = {call};" if n.target else f"{pad}{call};"]
    raise TypeError(n)


def print_function(fd: FunctionDef) -> str:
    params = ", ".join(f"int *{p}" if k == ARRAY else f"int {p}" for p, k in fd.params)
    head = ""
    if fd.declared_pre is not None:
        head = f"/*@ requires {print_cond(fd.declared_pre)}; */\n"
    lines = [f"{head}{fd.ret} {fd.name}({params}) {{"] + print_stmt(fd.body) + ["}"]
    return "\n".join(lines) + "\n"


def print_program(fds: list[FunctionDef]) -> str:
    return "\n".join(print_function(f) for f in fds)
