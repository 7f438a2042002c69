"""Instrumentation passes: yield insertion, guard numbering, weak lock form.

All passes are pure: they return a modified deep copy of the program.
"""

from __future__ import annotations

import copy

from .parser import expr_names
from .syntax import (
    Assert,
    Assign,
    Assume,
    Async,
    Atomic,
    Call,
    Decl,
    Field,
    GlobalVar,
    Const,
    If,
    Location,
    Name,
    Program,
    Ref,
    Return,
    While,
    Yield,
    YieldPoint,
    walk,
)


def entry_location(proc) -> Location:
    """Pseudo-location of a procedure's entry (index -1)."""
    return Location(proc.name, -1, proc.line)


def _shared_names(program: Program, proc):
    scalars = {g.name for g in program.globals if g.type not in program.structs}
    records = {g.name for g in program.globals if g.type in program.structs}
    records |= {p.name for p in proc.params if p.is_record}
    locals_ = {p.name for p in proc.params if not p.is_record}
    for stmt in walk(proc.body):
        if isinstance(stmt, Decl):
            locals_.add(stmt.name)
        elif isinstance(stmt, Call) and stmt.decl_type:
            locals_.add(stmt.target.id)
        elif isinstance(stmt, Async) and stmt.target:
            locals_.add(stmt.target)
    return scalars - locals_, records


def _touches(exprs, scalars, records) -> bool:
    for e in exprs:
        if e is None:
            continue
        for n in expr_names(e):
            if isinstance(n, Name) and n.id in scalars:
                return True
            if isinstance(n, Field) and n.base in records:
                return True
    return False


def _value_args(args, records):
    # records are passed by reference; passing one is not an access
    return [a for a in args if not isinstance(a, Ref) and not (isinstance(a, Name) and a.id in records)]


def accesses_shared(stmt, scalars, records) -> bool:
    """Whether executing ``stmt`` itself reads or writes shared memory.

    Compound statements only count their own condition, except atomic blocks,
    which run as one unit and so count everything inside.
    """
    if isinstance(stmt, Decl):
        return _touches([stmt.init], scalars, records)
    if isinstance(stmt, Assign):
        return _touches([stmt.target, stmt.value], scalars, records)
    if isinstance(stmt, Call):
        return _touches(_value_args(stmt.args, records) + [stmt.target], scalars, records)
    if isinstance(stmt, Async):
        return _touches(_value_args(stmt.args, records), scalars, records)
    if isinstance(stmt, (If, While, Assert, Assume)):
        return _touches([stmt.cond], scalars, records)
    if isinstance(stmt, Return):
        return _touches([stmt.value], scalars, records)
    if isinstance(stmt, Atomic):
        return any(accesses_shared(s, scalars, records) for s in walk(stmt.body))
    return False


def _ensure_lock(program: Program) -> str:
    if program.lock_var:
        return program.lock_var
    names = program.global_names()
    name = "lock"
    while name in names:
        name += "_"
    program.globals.append(GlobalVar("bool", name, Const(False), 0))
    program.lock_var = name
    return name


def insert_yields(program: Program) -> Program:
    """Put a yield before every shared access and at the start of each spawned thread.

    Thread-entry yields and ``@sync`` yields are excluded from fixes.  No yields
    go inside ``satomic`` blocks; yields inside ``watomic`` blocks always take
    the global lock.  Running the pass on its own output changes nothing.
    """
    p = copy.deepcopy(program)
    spawned = p.spawned()
    any_watomic = False
    for proc in p.procedures.values():
        scalars, records = _shared_names(p, proc)

        def visit(body, mode):
            nonlocal any_watomic
            out = []
            for stmt in body:
                prev = out[-1] if out else None
                if (
                    mode != "satomic"
                    and not isinstance(stmt, Yield)
                    and accesses_shared(stmt, scalars, records)
                    and not (isinstance(prev, Yield) and not prev.entry)
                ):
                    locked = mode == "watomic"
                    out.append(Yield(excluded=locked, locked=locked, loc=stmt.loc))
                if isinstance(stmt, If):
                    stmt.then = visit(stmt.then, mode)
                    stmt.orelse = visit(stmt.orelse, mode)
                elif isinstance(stmt, While):
                    stmt.body = visit(stmt.body, mode)
                    # re-evaluating a shared loop condition is another access
                    if (
                        mode != "satomic"
                        and accesses_shared(stmt, scalars, records)
                        and not (stmt.body and isinstance(stmt.body[-1], Yield))
                    ):
                        locked = mode == "watomic"
                        stmt.body.append(Yield(excluded=locked, locked=locked, loc=stmt.loc))
                elif isinstance(stmt, Atomic):
                    if stmt.kind == "watomic":
                        any_watomic = True
                    inner = "satomic" if mode == "satomic" or stmt.kind == "satomic" else "watomic"
                    stmt.body = visit(stmt.body, inner)
                out.append(stmt)
            return out

        proc.body = visit(proc.body, "plain")
        if proc.name in spawned and not (proc.body and isinstance(proc.body[0], Yield) and proc.body[0].entry):
            proc.body.insert(0, Yield(excluded=True, entry=True, loc=entry_location(proc)))
    if any_watomic:
        _ensure_lock(p)
    return p


def guard_yields(program: Program):
    """Number yields and attach a guard constant to every non-excluded one.

    Guards get the dense ids ``0..count-1`` in source order; excluded yields
    are numbered after them.  Returns ``(program, count)``.
    """
    p = copy.deepcopy(program)
    all_yields = [s for proc in p.procedures.values() for s in walk(proc.body) if isinstance(s, Yield)]
    guarded = [y for y in all_yields if not y.excluded]
    excluded = [y for y in all_yields if y.excluded]
    p.yields = []
    for i, y in enumerate(guarded + excluded):
        y.yid = i
        p.yields.append(YieldPoint(i, y.loc, y.excluded))
    p.guarded = True
    return p, len(guarded)


def instrument_weak(program: Program) -> Program:
    """Switch guarded yields to the global-lock form.

    With guard ``cs`` false a yield becomes
    ``if (!cs) { assume(lock == false); lock = true; } yield; if (!cs) { lock = false; }``
    so a disabled yield behaves as if it sat in a weak atomic block.
    """
    if not program.guarded:
        raise ValueError("instrument_weak needs a guard-instrumented program")
    p = copy.deepcopy(program)
    _ensure_lock(p)
    for proc in p.procedures.values():
        for stmt in walk(proc.body):
            if isinstance(stmt, Yield):
                stmt.weak = True
    p.weak = True
    return p


def instrument(program: Program, weak: bool = False) -> Program:
    """insert_yields + guard_yields (+ instrument_weak)."""
    p, _ = guard_yields(insert_yields(program))
    return instrument_weak(p) if weak else p
