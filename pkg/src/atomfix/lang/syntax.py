"""Abstract syntax for MiniConc, the small cooperative-concurrency language.

Every statement carries a :class:`Location`.  Yield statements inserted by
the instrumentation passes reuse the location of the statement they precede,
so a yield is identified by its ``yid`` rather than by its location.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union


class Location(NamedTuple):
    proc: str
    index: int
    line: int

    def __str__(self) -> str:
        return f"{self.proc}:{self.line}"


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Union[int, bool]


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Field:
    """``base.field`` where ``base`` names a global record or a record parameter."""

    base: str
    field: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ref:
    """``&name`` in an argument list: pass a record by reference."""

    name: str


Expr = Union[Const, Name, Field, Unary, Binary, Ref]
LValue = Union[Name, Field]


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------


@dataclass
class Stmt:
    loc: Location = field(default=Location("?", -1, 0), kw_only=True)


@dataclass
class Decl(Stmt):
    type: str
    name: str
    init: Optional[Expr] = None


@dataclass
class Assign(Stmt):
    target: LValue
    value: Expr


@dataclass
class Call(Stmt):
    """Procedure call, optionally storing the result (``x = f(..)`` or ``int x = f(..)``)."""

    proc: str
    args: list
    target: Optional[LValue] = None
    decl_type: Optional[str] = None


@dataclass
class Async(Stmt):
    proc: str
    args: list
    target: Optional[str] = None


@dataclass
class Join(Stmt):
    handle: str


@dataclass
class If(Stmt):
    cond: Expr
    then: list
    orelse: list


@dataclass
class While(Stmt):
    cond: Expr
    body: list
    bound: int


@dataclass
class Assert(Stmt):
    cond: Expr


@dataclass
class Assume(Stmt):
    cond: Expr


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Atomic(Stmt):
    kind: str  # "satomic" | "watomic"
    body: list


@dataclass
class Yield(Stmt):
    """A yield point.

    ``explicit`` yields were written in the source; the others were inserted
    and sit in front of the statement whose location they share.  ``entry``
    marks the yield that opens a spawned thread.  ``locked`` yields live
    inside a source ``watomic`` block and always use the global lock.
    """

    yid: Optional[int] = None
    excluded: bool = False
    sync: bool = False
    explicit: bool = False
    entry: bool = False
    locked: bool = False
    weak: bool = False


# --------------------------------------------------------------------------
# Declarations and programs
# --------------------------------------------------------------------------


@dataclass
class Param:
    type: str
    name: str
    is_record: bool = False


@dataclass
class GlobalVar:
    type: str
    name: str
    init: Optional[Expr] = None
    line: int = 0


@dataclass
class Procedure:
    name: str
    ret_type: str
    params: list
    body: list
    bound: Optional[int] = None
    line: int = 0


@dataclass(frozen=True)
class YieldPoint:
    id: int
    location: Location
    excluded: bool


@dataclass
class Program:
    structs: dict = field(default_factory=dict)  # struct name -> list of field names
    globals: list = field(default_factory=list)  # GlobalVar
    procedures: dict = field(default_factory=dict)  # name -> Procedure, source order
    axioms: list = field(default_factory=list)  # Expr
    yields: list = field(default_factory=list)  # YieldPoint, indexed by id
    guarded: bool = False
    weak: bool = False
    lock_var: Optional[str] = None

    @property
    def main(self) -> Procedure:
        return self.procedures["main"]

    @property
    def guard_ids(self) -> list:
        """Ids of yields eligible for a fix (the guard constants)."""
        return [y.id for y in self.yields if not y.excluded]

    @property
    def excluded_ids(self) -> set:
        return {y.id for y in self.yields if y.excluded}

    def record_globals(self) -> dict:
        return {g.name: g.type for g in self.globals if g.type in self.structs}

    def global_names(self) -> set:
        return {g.name for g in self.globals}

    def spawned(self) -> set:
        """Names of procedures used as ``async`` targets."""
        out = set()
        for proc in self.procedures.values():
            for stmt in walk(proc.body):
                if isinstance(stmt, Async):
                    out.add(stmt.proc)
        return out

    def statements(self):
        for proc in self.procedures.values():
            yield from walk(proc.body)

    def find(self, proc: str, line: int) -> Stmt:
        """The non-yield statement of ``proc`` starting on ``line``."""
        for stmt in walk(self.procedures[proc].body):
            if stmt.loc.line == line and not isinstance(stmt, Yield):
                return stmt
        raise KeyError(f"no statement at {proc}:{line}")

    def yields_at(self, proc: str, line: int) -> list:
        return [y for y in self.yields if y.location.proc == proc and y.location.line == line]


def children(stmt: Stmt) -> list:
    if isinstance(stmt, If):
        return [stmt.then, stmt.orelse]
    if isinstance(stmt, (While, Atomic)):
        return [stmt.body]
    return []


def walk(body: list):
    """Preorder traversal over a statement list."""
    for stmt in body:
        yield stmt
        for block in children(stmt):
            yield from walk(block)
