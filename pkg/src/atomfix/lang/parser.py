"""Hand-written recursive-descent parser for MiniConc ``.mc`` sources.

The concrete syntax is C-like::

    struct Account { int amount; } acc1, acc2;
    int x = 0;

    int transfer(Account* src, Account* dst, int amount) {
      if (src->amount >= amount) { ... }
      return 0;
    }

    void main() {
      t1 = async thread1();
      join(t1);
      assert(x == 10);
    }

Loops must carry ``@bound(k)`` and recursive procedures a ``@bound(k)``
depth annotation; ``@sync yield;`` marks a synchronization yield.
"""

from __future__ import annotations

import re

from ..errors import ParseError, UnboundedLoop
from .syntax import (
    Assert,
    Assign,
    Assume,
    Async,
    Atomic,
    Binary,
    Call,
    Const,
    Decl,
    Field,
    GlobalVar,
    If,
    Join,
    Location,
    Name,
    Param,
    Procedure,
    Program,
    Ref,
    Return,
    Unary,
    While,
    Yield,
    walk,
)

TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|&&|\|\||==|!=|<=|>=|\+=|-=|[{}()\[\];,.=<>+\-*/%!&@])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {
    "struct", "int", "bool", "void", "if", "else", "while", "assert", "assume",
    "axiom", "yield", "satomic", "watomic", "async", "join", "return", "true", "false",
}
SCALAR_TYPES = {"int", "bool"}


class Token:
    __slots__ = ("kind", "text", "line")

    def __init__(self, kind, text, line):
        self.kind = kind
        self.text = text
        self.line = line

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line})"


def tokenize(source: str) -> list:
    tokens = []
    line = 1
    pos = 0
    while pos < len(source):
        m = TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(line, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
        elif kind == "comment":
            line += text.count("\n")
        elif kind != "ws":
            if kind == "name" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line))
        pos = m.end()
    tokens.append(Token("eof", "", line))
    return tokens


BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.pos = 0
        self.program = Program()
        self.proc = None
        self.counter = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            raise ParseError(self.tok.line, f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def accept(self, text) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "name":
            raise ParseError(self.tok.line, f"expected identifier, found {self.tok.text!r}")
        return self.advance().text

    def number(self) -> int:
        if self.tok.kind != "num":
            raise ParseError(self.tok.line, f"expected integer, found {self.tok.text!r}")
        return int(self.advance().text)

    def is_type(self, tok=None) -> bool:
        tok = tok or self.tok
        return tok.text in SCALAR_TYPES or (tok.kind == "name" and tok.text in self.program.structs)

    def loc(self, line) -> Location:
        loc = Location(self.proc, self.counter, line)
        self.counter += 1
        return loc

    # -- top level -----------------------------------------------------------

    def parse(self) -> Program:
        while self.tok.kind != "eof":
            if self.at("struct"):
                self.struct_decl()
            elif self.at("axiom"):
                self.advance()
                self.expect("(")
                self.program.axioms.append(self.expr())
                self.expect(")")
                self.expect(";")
            else:
                bound = self.annotations().get("bound")
                self.toplevel_decl(bound)
        if "main" not in self.program.procedures:
            raise ParseError(self.tok.line, "program has no main procedure")
        return self.program

    def annotations(self) -> dict:
        out = {}
        while self.at("@"):
            line = self.advance().line
            name = self.ident()
            if name == "bound":
                self.expect("(")
                out["bound"] = self.number()
                self.expect(")")
            elif name == "sync":
                out["sync"] = True
            else:
                raise ParseError(line, f"unknown annotation @{name}")
        return out

    def struct_decl(self):
        self.expect("struct")
        name = self.ident()
        fields = []
        self.expect("{")
        while not self.accept("}"):
            line = self.tok.line
            if self.advance().text not in SCALAR_TYPES:
                raise ParseError(line, "record fields must be int or bool")
            fields.append(self.ident())
            self.expect(";")
        self.program.structs[name] = fields
        if not self.at(";"):
            self.global_names(name)
        self.expect(";")

    def global_names(self, type_):
        while True:
            line = self.tok.line
            name = self.ident()
            init = None
            if self.accept("="):
                if type_ not in SCALAR_TYPES:
                    raise ParseError(line, "records cannot have initializers")
                init = self.expr()
            self.add_global(GlobalVar(type_, name, init, line))
            if not self.accept(","):
                break

    def add_global(self, g: GlobalVar):
        if g.name in self.program.global_names():
            raise ParseError(g.line, f"duplicate global {g.name!r}")
        self.program.globals.append(g)

    def toplevel_decl(self, bound):
        line = self.tok.line
        if not (self.is_type() or self.at("void")):
            raise ParseError(line, f"expected declaration, found {self.tok.text!r}")
        type_ = self.advance().text
        if self.peek().text == "(":
            self.procedure(type_, bound, line)
            return
        if bound is not None:
            raise ParseError(line, "@bound applies to loops and procedures only")
        if type_ == "void":
            raise ParseError(line, "variables cannot be void")
        self.global_names(type_)
        self.expect(";")

    def procedure(self, ret_type, bound, line):
        name = self.ident()
        if name in self.program.procedures:
            raise ParseError(line, f"duplicate procedure {name!r}")
        self.proc = name
        self.counter = 0
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pline = self.tok.line
                if not self.is_type():
                    raise ParseError(pline, f"expected parameter type, found {self.tok.text!r}")
                ptype = self.advance().text
                pointer = self.accept("*")
                is_record = ptype in self.program.structs
                if pointer and not is_record:
                    raise ParseError(pline, "only record parameters may be pointers")
                params.append(Param(ptype, self.ident(), is_record))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.block()
        self.program.procedures[name] = Procedure(name, ret_type, params, body, bound, line)
        self.proc = None

    # -- statements ----------------------------------------------------------

    def block(self) -> list:
        self.expect("{")
        out = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise ParseError(self.tok.line, "unterminated block")
            out.extend(self.statement())
        return out

    def body_or_stmt(self) -> list:
        if self.at("{"):
            return self.block()
        return self.statement()

    def statement(self) -> list:
        line = self.tok.line
        notes = self.annotations()
        if self.at("while"):
            return [self.while_stmt(notes.get("bound"), line)]
        if self.at("yield"):
            self.advance()
            self.expect(";")
            return [Yield(explicit=True, sync=notes.get("sync", False), excluded=notes.get("sync", False), loc=self.loc(line))]
        if notes:
            raise ParseError(line, "annotation not allowed here")
        if self.at("{"):
            return self.block()
        if self.at(";"):
            self.advance()
            return []
        if self.at("if"):
            loc = self.loc(line)
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body_or_stmt()
            orelse = self.body_or_stmt() if self.accept("else") else []
            return [If(cond, then, orelse, loc=loc)]
        if self.at("satomic") or self.at("watomic"):
            loc = self.loc(line)
            kind = self.advance().text
            return [Atomic(kind, self.block(), loc=loc)]
        if self.at("assert") or self.at("assume"):
            loc = self.loc(line)
            cls = Assert if self.advance().text == "assert" else Assume
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return [cls(cond, loc=loc)]
        if self.at("return"):
            loc = self.loc(line)
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [Return(value, loc=loc)]
        if self.at("join"):
            loc = self.loc(line)
            self.advance()
            self.expect("(")
            handle = self.ident()
            self.expect(")")
            self.expect(";")
            return [Join(handle, loc=loc)]
        if self.at("async"):
            loc = self.loc(line)
            stmt = self.async_call(None, loc)
            self.expect(";")
            return [stmt]
        if self.is_type() and self.peek().kind == "name" and self.peek(2).text != "(":
            return [self.local_decl(line)]
        return [self.simple(line)]

    def while_stmt(self, bound, line):
        loc = self.loc(line)
        self.expect("while")
        inner = self.annotations().get("bound")
        bound = bound if bound is not None else inner
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        after = self.annotations().get("bound")
        bound = bound if bound is not None else after
        body = self.body_or_stmt()
        if bound is None:
            raise UnboundedLoop(loc)
        return While(cond, body, bound, loc=loc)

    def local_decl(self, line):
        loc = self.loc(line)
        type_ = self.advance().text
        if type_ not in SCALAR_TYPES:
            raise ParseError(line, "record variables must be global")
        name = self.ident()
        if self.accept("="):
            if self.at("async"):
                stmt = self.async_call(name, loc)
            elif self.is_call():
                stmt = self.call(Name(name), loc, decl_type=type_)
            else:
                stmt = Decl(type_, name, self.expr(), loc=loc)
        else:
            stmt = Decl(type_, name, None, loc=loc)
        self.expect(";")
        return stmt

    def is_call(self) -> bool:
        # procedures may be used before they are defined
        return self.tok.kind == "name" and self.peek().text == "("

    def simple(self, line):
        loc = self.loc(line)
        if self.tok.kind == "name" and self.peek().text == "(":
            stmt = self.call(None, loc)
            self.expect(";")
            return stmt
        target = self.lvalue()
        if self.at("+=") or self.at("-="):
            op = self.advance().text[0]
            stmt = Assign(target, Binary(op, target, self.expr()), loc=loc)
        else:
            self.expect("=")
            if self.at("async"):
                if not isinstance(target, Name):
                    raise ParseError(line, "thread handles must be plain variables")
                stmt = self.async_call(target.id, loc)
            elif self.is_call():
                stmt = self.call(target, loc)
            else:
                stmt = Assign(target, self.expr(), loc=loc)
        self.expect(";")
        return stmt

    def lvalue(self):
        name = self.ident()
        if self.at(".") or self.at("->"):
            self.advance()
            return Field(name, self.ident())
        return Name(name)

    def args(self) -> list:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                if self.accept("&"):
                    out.append(Ref(self.ident()))
                else:
                    out.append(self.expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return out

    def call(self, target, loc, decl_type=None):
        proc = self.ident()
        return Call(proc, self.args(), target, decl_type, loc=loc)

    def async_call(self, target, loc):
        self.expect("async")
        proc = self.ident()
        return Async(proc, self.args(), target, loc=loc)

    # -- expressions ---------------------------------------------------------

    def expr(self, level=0):
        if level == len(BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in BINARY_LEVELS[level]:
            op = self.advance().text
            left = Binary(op, left, self.expr(level + 1))
        return left

    def unary(self):
        if self.at("!") or self.at("-"):
            op = self.advance().text
            return Unary(op, self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Const(int(tok.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return Const(tok.text == "true")
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            if self.peek().text == "(":
                raise ParseError(tok.line, "calls are statements, not expressions")
            return self.lvalue()
        raise ParseError(tok.line, f"unexpected {tok.text or 'end of input'!r} in expression")


def parse(source: str) -> Program:
    """Parse and validate a MiniConc program."""
    program = Parser(source).parse()
    check(program)
    return program


# --------------------------------------------------------------------------
# Name resolution and static checks
# --------------------------------------------------------------------------


def expr_names(e):
    """Yield every Name / Field / Ref node inside an expression."""
    if isinstance(e, (Name, Field, Ref)):
        yield e
    elif isinstance(e, Unary):
        yield from expr_names(e.operand)
    elif isinstance(e, Binary):
        yield from expr_names(e.left)
        yield from expr_names(e.right)


def check(program: Program) -> None:
    globals_ = {g.name: g.type for g in program.globals}
    for g in program.globals:
        if g.type not in SCALAR_TYPES and g.type not in program.structs:
            raise ParseError(g.line, f"unknown type {g.type!r}")
        if g.init is not None:
            if any(True for _ in expr_names(g.init)):
                raise ParseError(g.line, "global initializers must be constants")
    for ax in program.axioms:
        for n in expr_names(ax):
            _check_global_use(program, n, globals_, 0)

    for proc in program.procedures.values():
        _check_procedure(program, proc, globals_)
    _check_recursion(program)


def _check_global_use(program, n, globals_, line):
    if isinstance(n, Name) and n.id in globals_ and globals_[n.id] in SCALAR_TYPES:
        return
    if isinstance(n, Field) and n.base in globals_ and n.field in program.structs.get(globals_[n.base], ()):
        return
    raise ParseError(line, f"undeclared name {_show(n)!r}")


def _show(n):
    return f"{n.base}.{n.field}" if isinstance(n, Field) else getattr(n, "id", getattr(n, "name", "?"))


def _check_procedure(program, proc, globals_):
    scalars = {}
    records = {}
    handles = set()
    for p in proc.params:
        if p.name in scalars or p.name in records:
            raise ParseError(proc.line, f"duplicate parameter {p.name!r}")
        if p.is_record:
            records[p.name] = p.type
        else:
            scalars[p.name] = p.type
    for stmt in walk(proc.body):
        if isinstance(stmt, Decl):
            scalars[stmt.name] = stmt.type
        elif isinstance(stmt, Call) and stmt.decl_type:
            scalars[stmt.target.id] = stmt.decl_type
        elif isinstance(stmt, Async) and stmt.target is not None:
            if stmt.target in globals_:
                raise ParseError(stmt.loc.line, "thread handles must be local")
            handles.add(stmt.target)
            scalars.setdefault(stmt.target, "int")

    def resolve(n, line):
        if isinstance(n, Ref):
            if n.name in records or globals_.get(n.name) in program.structs:
                return
            raise ParseError(line, f"{n.name!r} is not a record")
        if isinstance(n, Name):
            if n.id in scalars or (n.id in globals_ and globals_[n.id] in SCALAR_TYPES):
                return
            if n.id in records or globals_.get(n.id) in program.structs:
                return  # record passed by reference
            raise ParseError(line, f"undeclared name {n.id!r}")
        if isinstance(n, Field):
            rtype = records.get(n.base) or globals_.get(n.base)
            if rtype not in program.structs:
                raise ParseError(line, f"{n.base!r} is not a record")
            if n.field not in program.structs[rtype]:
                raise ParseError(line, f"record {rtype} has no field {n.field!r}")

    def check_expr(e, line):
        for n in expr_names(e):
            if isinstance(n, Ref):
                raise ParseError(line, "'&' is only allowed on call arguments")
            if isinstance(n, Name) and (n.id in records or globals_.get(n.id) in program.structs):
                raise ParseError(line, f"record {n.id!r} used as a value")
            resolve(n, line)

    def check_args(stmt, callee):
        if callee not in program.procedures:
            raise ParseError(stmt.loc.line, f"undeclared procedure {callee!r}")
        params = program.procedures[callee].params
        if len(params) != len(stmt.args):
            raise ParseError(stmt.loc.line, f"{callee} expects {len(params)} arguments")
        for p, a in zip(params, stmt.args):
            if p.is_record:
                name = a.name if isinstance(a, Ref) else a.id if isinstance(a, Name) else None
                rtype = records.get(name) or globals_.get(name)
                if rtype != p.type:
                    raise ParseError(stmt.loc.line, f"argument for {p.name!r} must be a {p.type} record")
            else:
                check_expr(a, stmt.loc.line)

    for stmt in walk(proc.body):
        line = stmt.loc.line
        if isinstance(stmt, (Assign, Decl)):
            target = stmt.target if isinstance(stmt, Assign) else None
            if target is not None:
                resolve(target, line)
                if isinstance(target, Name) and target.id not in scalars and target.id not in globals_:
                    raise ParseError(line, f"undeclared name {target.id!r}")
                if isinstance(target, Name) and target.id in records:
                    raise ParseError(line, "cannot assign to a record")
            value = stmt.value if isinstance(stmt, Assign) else stmt.init
            if value is not None:
                check_expr(value, line)
        elif isinstance(stmt, Call):
            check_args(stmt, stmt.proc)
            if stmt.target is not None:
                resolve(stmt.target, line)
        elif isinstance(stmt, Async):
            check_args(stmt, stmt.proc)
        elif isinstance(stmt, Join):
            if stmt.handle not in handles:
                raise ParseError(line, f"join on {stmt.handle!r}, which is not bound by async")
        elif isinstance(stmt, (If, While, Assert, Assume)):
            check_expr(stmt.cond, line)
        elif isinstance(stmt, Return) and stmt.value is not None:
            check_expr(stmt.value, line)


def _check_recursion(program):
    graph = {name: set() for name in program.procedures}
    for name, proc in program.procedures.items():
        for stmt in walk(proc.body):
            if isinstance(stmt, Call):
                graph[name].add(stmt.proc)
    # a procedure is recursive if it reaches itself
    for name, proc in program.procedures.items():
        seen = set()
        stack = list(graph[name])
        while stack:
            cur = stack.pop()
            if cur == name:
                if proc.bound is None:
                    raise ParseError(proc.line, f"recursive procedure {name!r} needs a @bound(k) depth annotation")
                break
            if cur not in seen:
                seen.add(cur)
                stack.extend(graph[cur])
