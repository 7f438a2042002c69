"""Bounded explorer of cooperative interleavings.

Procedures are compiled to a flat instruction list and explored depth-first.
Only yields (and threads blocking or finishing) are scheduling points, so a
state is identified by the globals, every thread's stack and the running
thread.  Choice-point states are memoized, which is exact because the state
graph is acyclic (loops and recursion are bounded) and the search stops at
the first bug.

Canonical order: at a yield the running thread first tries switching to each
other enabled thread in increasing id order, then continues itself.  When the
running thread blocks or finishes, the enabled threads are tried in increasing
id order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import BudgetExceeded, ExecutionError
from ..lang.syntax import (
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
    If,
    Join,
    Location,
    Name,
    Program,
    Ref,
    Return,
    Unary,
    While,
    Yield,
    walk,
)
from .constraint import Constraint
from .trace import Bug, Correct, Event, Trace

# opcodes
ASSIGN, BRANCH, JUMP, LOOP_INIT, LOOP_TEST, ASSERT, ASSUME = range(7)
YIELD, RESUME, CALL, RET, END, ASYNC, JOIN, ABEGIN, AEND = range(7, 16)
INVISIBLE = {JUMP, LOOP_INIT, END, ABEGIN, AEND}


@dataclass(frozen=True)
class ExplorationBudget:
    """Limits for one verifier query.

    ``step_cap`` bounds the executed instructions over the whole search;
    ``cs_bound`` optionally bounds the context switches per schedule.
    """

    step_cap: int = 10**6
    cs_bound: Optional[int] = None


class Instr:
    __slots__ = ("op", "loc", "a", "b", "c", "d")

    def __init__(self, op, loc, a=None, b=None, c=None, d=None):
        self.op = op
        self.loc = loc
        self.a = a
        self.b = b
        self.c = c
        self.d = d


def _div(a, b):
    if b == 0:
        raise ExecutionError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a, b):
    return a - b * _div(a, b)


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


class _ProcCode:
    def __init__(self, index, proc):
        self.index = index
        self.proc = proc
        self.code = []
        self.nlocals = 0
        self.local_index = {}
        self.local_defaults = []


class Compiled:
    """A program lowered to per-procedure instruction lists."""

    def __init__(self, program: Program):
        if not program.guarded:
            raise ValueError("the verifier needs a guard-instrumented program")
        self.program = program
        self.slots = {}
        self.field_slot = {}
        init = []
        for gv in program.globals:
            if gv.type in program.structs:
                for f in program.structs[gv.type]:
                    self.field_slot[gv.name, f] = len(init)
                    init.append(0)
            else:
                self.slots[gv.name] = len(init)
                v = gv.init.value if gv.init is not None else (False if gv.type == "bool" else 0)
                init.append(v)
        self.init_globals = tuple(init)
        self.records = program.record_globals()
        self.lock_slot = self.slots.get(program.lock_var) if program.lock_var else None
        self.procs = {}
        self.proc_list = []
        for i, (name, proc) in enumerate(program.procedures.items()):
            pc = _ProcCode(i, proc)
            self.procs[name] = pc
            self.proc_list.append(pc)
        for pc in self.proc_list:
            self._layout(pc)
        for pc in self.proc_list:
            self._env = pc
            self._block(pc.proc.body, pc.code)
            pc.code.append(Instr(END, Location(pc.proc.name, -2, 0)))
        self._env = None
        self.axioms = [self._expr(a, None) for a in program.axioms]
        self.weak = program.weak

    # -- layout ----------------------------------------------------------------

    def _layout(self, pc):
        def add(name, default):
            if name not in pc.local_index:
                pc.local_index[name] = len(pc.local_defaults)
                pc.local_defaults.append(default)

        for p in pc.proc.params:
            add(p.name, None)
        for stmt in walk(pc.proc.body):
            if isinstance(stmt, Decl):
                add(stmt.name, False if stmt.type == "bool" else 0)
            elif isinstance(stmt, Call) and stmt.decl_type:
                add(stmt.target.id, False if stmt.decl_type == "bool" else 0)
            elif isinstance(stmt, Async) and stmt.target:
                add(stmt.target, -1)
            elif isinstance(stmt, While):
                add(("loop", stmt.loc.index), 0)
        pc.nlocals = len(pc.local_defaults)
        pc.record_params = {p.name for p in pc.proc.params if p.is_record}

    # -- expressions -----------------------------------------------------------

    def _expr(self, e, env):
        if isinstance(e, Const):
            v = e.value
            return lambda g, l: v
        if isinstance(e, Name):
            if env is not None and e.id in env.local_index:
                i = env.local_index[e.id]
                return lambda g, l: l[i]
            s = self.slots[e.id]
            return lambda g, l: g[s]
        if isinstance(e, Field):
            f = e.field
            if env is not None and e.base in env.record_params:
                i = env.local_index[e.base]
                fs = self.field_slot
                return lambda g, l: g[fs[l[i], f]]
            s = self.field_slot[e.base, f]
            return lambda g, l: g[s]
        if isinstance(e, Unary):
            x = self._expr(e.operand, env)
            if e.op == "!":
                return lambda g, l: not x(g, l)
            return lambda g, l: -x(g, l)
        if isinstance(e, Binary):
            a = self._expr(e.left, env)
            b = self._expr(e.right, env)
            if e.op == "&&":
                return lambda g, l: bool(a(g, l)) and bool(b(g, l))
            if e.op == "||":
                return lambda g, l: bool(a(g, l)) or bool(b(g, l))
            op = _BINOPS[e.op]
            return lambda g, l: op(a(g, l), b(g, l))
        raise ExecutionError(f"cannot evaluate {e!r}")

    def _setter(self, target, env):
        """fn(g, l, v) -> (g, l) writing ``v`` into ``target``."""
        if isinstance(target, Name) and target.id in env.local_index:
            i = target.id
            i = env.local_index[i]
            return lambda g, l, v: (g, l[:i] + (v,) + l[i + 1:])
        if isinstance(target, Name):
            s = self.slots[target.id]
        elif target.base in env.record_params:
            i = env.local_index[target.base]
            fs = self.field_slot
            f = target.field

            def set_param_field(g, l, v):
                s = fs[l[i], f]
                return g[:s] + (v,) + g[s + 1:], l

            return set_param_field
        else:
            s = self.field_slot[target.base, target.field]
        return lambda g, l, v: (g[:s] + (v,) + g[s + 1:], l)

    def _args(self, args, callee, env):
        """fn(g, l) -> initial locals tuple of ``callee``."""
        fns = []
        for p, a in zip(callee.proc.params, args):
            if p.is_record:
                name = a.name if isinstance(a, Ref) else a.id
                if name in env.record_params:
                    i = env.local_index[name]
                    fns.append(lambda g, l, i=i: l[i])
                else:
                    fns.append(lambda g, l, name=name: name)
            else:
                fns.append(self._expr(a, env))
        rest = tuple(callee.local_defaults[len(fns):])
        return lambda g, l: tuple(f(g, l) for f in fns) + rest

    # -- statements --------------------------------------------------------------

    def _block(self, body, code):
        env = self._env
        for stmt in body:
            loc = stmt.loc
            if isinstance(stmt, Decl):
                value = self._expr(stmt.init, env) if stmt.init is not None else (lambda g, l, d=env.local_defaults[env.local_index[stmt.name]]: d)
                setter = self._setter(Name(stmt.name), env)
                code.append(Instr(ASSIGN, loc, lambda g, l, s=setter, v=value: s(g, l, v(g, l))))
            elif isinstance(stmt, Assign):
                setter = self._setter(stmt.target, env)
                value = self._expr(stmt.value, env)
                code.append(Instr(ASSIGN, loc, lambda g, l, s=setter, v=value: s(g, l, v(g, l))))
            elif isinstance(stmt, If):
                br = Instr(BRANCH, loc, self._expr(stmt.cond, env))
                code.append(br)
                self._block(stmt.then, code)
                if stmt.orelse:
                    j = Instr(JUMP, loc)
                    code.append(j)
                    br.b = len(code)
                    self._block(stmt.orelse, code)
                    j.a = len(code)
                else:
                    br.b = len(code)
            elif isinstance(stmt, While):
                ctr = env.local_index[("loop", stmt.loc.index)]
                code.append(Instr(LOOP_INIT, loc, ctr))
                head = len(code)
                test = Instr(LOOP_TEST, loc, self._expr(stmt.cond, env), None, ctr, stmt.bound)
                code.append(test)
                self._block(stmt.body, code)
                code.append(Instr(JUMP, loc, head))
                test.b = len(code)
            elif isinstance(stmt, Assert):
                code.append(Instr(ASSERT, loc, self._expr(stmt.cond, env)))
            elif isinstance(stmt, Assume):
                code.append(Instr(ASSUME, loc, self._expr(stmt.cond, env)))
            elif isinstance(stmt, Yield):
                if stmt.yid is None:
                    raise ValueError("yield without an id; run guard_yields first")
                guard = None if stmt.excluded else stmt.yid
                code.append(Instr(YIELD, loc, stmt.yid, guard, stmt.locked))
                code.append(Instr(RESUME, loc, stmt.yid, guard))
            elif isinstance(stmt, Call):
                callee = self.procs[stmt.proc]
                setter = self._setter(stmt.target, env) if stmt.target is not None else None
                code.append(Instr(CALL, loc, callee.index, self._args(stmt.args, callee, env), setter))
            elif isinstance(stmt, Return):
                value = self._expr(stmt.value, env) if stmt.value is not None else None
                code.append(Instr(RET, loc, value))
            elif isinstance(stmt, Async):
                callee = self.procs[stmt.proc]
                handle = env.local_index[stmt.target] if stmt.target else None
                code.append(Instr(ASYNC, loc, callee.index, self._args(stmt.args, callee, env), handle))
            elif isinstance(stmt, Join):
                code.append(Instr(JOIN, loc, env.local_index[stmt.handle]))
            elif isinstance(stmt, Atomic):
                strong = stmt.kind == "satomic"
                code.append(Instr(ABEGIN, loc, strong))
                self._block(stmt.body, code)
                code.append(Instr(AEND, loc, strong))
            else:
                raise ExecutionError(f"unsupported statement {stmt!r}")


# A thread is (root_proc, frames, sdepth, wdepth, holds_lock); a frame is
# (proc_index, pc, locals, ret_setter, sdepth_at_entry, wdepth_at_entry).
# A state is (globals, threads, cur, true_guards, switches).


class _Prune(Exception):
    pass


class Machine:
    def __init__(self, program: Program, phi: Optional[Constraint] = None, budget: Optional[ExplorationBudget] = None):
        self.c = program if isinstance(program, Compiled) else Compiled(program)
        self.phi = phi or Constraint.true()
        self.budget = budget or ExplorationBudget()
        self.disabled = self.phi.disabled
        self.residual = self.phi.residual()
        if self.residual and self.c.weak:
            raise ValueError("weak-mode queries accept only unit clauses")
        self.tracked = frozenset().union(*self.residual) if self.residual else frozenset()
        self.steps = 0
        self.states = 0

    # -- helpers -----------------------------------------------------------------

    def initial(self):
        main = self.c.procs["main"]
        frame = (main.index, 0, tuple(main.local_defaults), None, 0, 0)
        thread = self._normalize(("main", (frame,), 0, 0, False))
        return (self.c.init_globals, (thread,), 0, frozenset(), 0)

    def _instr(self, thread):
        f = thread[1][-1]
        return self.c.proc_list[f[0]].code[f[1]]

    def _normalize(self, thread):
        """Advance past instructions that have no observable effect."""
        root, frames, sd, wd, holds = thread
        while frames:
            p, pc, l, ret, sb, wb = frames[-1]
            ins = self.c.proc_list[p].code[pc]
            op = ins.op
            if op == JUMP:
                frames = frames[:-1] + ((p, ins.a, l, ret, sb, wb),)
            elif op == LOOP_INIT:
                i = ins.a
                frames = frames[:-1] + ((p, pc + 1, l[:i] + (0,) + l[i + 1:], ret, sb, wb),)
            elif op == ABEGIN:
                if ins.a:
                    sd += 1
                else:
                    wd += 1
                frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
            elif op == AEND:
                if ins.a:
                    sd -= 1
                else:
                    wd -= 1
                frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
            elif op == END:
                frames = frames[:-1]
                sd, wd = sb, wb
            else:
                break
        return (root, frames, sd, wd, holds)

    def _lock_held(self, g):
        s = self.c.lock_slot
        return s is not None and bool(g[s])

    def _locked_yield(self, thread, ins):
        return ins.c or thread[3] > 0 or (self.c.weak and ins.b is not None and ins.b in self.disabled)

    def _lock_blocked(self, g, thread):
        if not thread[1] or not self._lock_held(g):
            return False
        ins = self._instr(thread)
        return ins.op == YIELD and self._locked_yield(thread, ins)

    def _enabled(self, g, threads, t):
        thread = threads[t]
        if not thread[1]:
            return False
        ins = self._instr(thread)
        op = ins.op
        if op == ASSUME:
            return bool(ins.a(g, thread[1][-1][2]))
        if op == JOIN:
            h = thread[1][-1][2][ins.a]
            return 0 <= h < len(threads) and not threads[h][1]
        if op == YIELD:
            return not (self._locked_yield(thread, ins) and self._lock_held(g))
        if op == LOOP_TEST:
            l = thread[1][-1][2]
            return not (ins.a(g, l) and l[ins.c] >= ins.d)
        if op == CALL:
            callee = self.c.proc_list[ins.a].proc
            if callee.bound is not None:
                depth = sum(1 for f in thread[1] if f[0] == ins.a)
                return depth < callee.bound
        return True

    def _enabled_threads(self, g, threads, exclude=None):
        return [t for t in range(len(threads)) if t != exclude and self._enabled(g, threads, t)]

    def _tick(self):
        self.steps += 1
        if self.steps > self.budget.step_cap:
            raise BudgetExceeded(self.steps)

    def _check_axioms(self, g):
        for ax in self.c.axioms:
            if not ax(g, ()):
                raise _Prune()

    def _can_switch(self, state, thread, ins):
        g, threads, cur, tg, nsw = state
        if thread[2] > 0:
            return False
        gid = ins.b
        if gid is not None and not self.c.weak and gid in self.disabled:
            return False
        cap = self.budget.cs_bound
        if cap is not None and nsw >= cap:
            return False
        if gid is not None and gid in self.tracked:
            on = tg | {gid}
            if any(gid in cl and cl <= on for cl in self.residual):
                return False
        return True

    # -- execution ---------------------------------------------------------------

    def _step(self, state):
        """Execute the running thread's next (non-yield) instruction.

        Returns ``(state, event, failed)``.
        """
        g, threads, cur, tg, nsw = state
        thread = threads[cur]
        root, frames, sd, wd, holds = thread
        p, pc, l, ret, sb, wb = frames[-1]
        ins = self.c.proc_list[p].code[pc]
        op = ins.op
        ev = Event(cur, ins.loc)
        failed = None
        if op == ASSIGN:
            g, l = ins.a(g, l)
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        elif op == BRANCH:
            nxt = pc + 1 if ins.a(g, l) else ins.b
            frames = frames[:-1] + ((p, nxt, l, ret, sb, wb),)
        elif op == LOOP_TEST:
            if ins.a(g, l):
                i = ins.c
                l = l[:i] + (l[i] + 1,) + l[i + 1:]
                frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
            else:
                frames = frames[:-1] + ((p, ins.b, l, ret, sb, wb),)
        elif op == ASSERT:
            if not ins.a(g, l):
                failed = ins.loc
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        elif op == ASSUME:
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        elif op == RESUME:
            ev = Event(cur, ins.loc, "resume", ins.a, ins.b)
            if holds:
                s = self.c.lock_slot
                g = g[:s] + (False,) + g[s + 1:]
                holds = False
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        elif op == CALL:
            callee = self.c.proc_list[ins.a]
            new = (ins.a, 0, ins.b(g, l), ins.c, sd, wd)
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb), new)
        elif op == RET:
            v = ins.a(g, l) if ins.a is not None else None
            frames = frames[:-1]
            sd, wd = sb, wb
            if frames and ret is not None:
                cp, cpc, cl, cret, csb, cwb = frames[-1]
                g, cl = ret(g, cl, v)
                frames = frames[:-1] + ((cp, cpc, cl, cret, csb, cwb),)
        elif op == ASYNC:
            tid = len(threads)
            callee = self.c.proc_list[ins.a]
            child = self._normalize((callee.proc.name, ((ins.a, 0, ins.b(g, l), None, 0, 0),), 0, 0, False))
            if ins.c is not None:
                i = ins.c
                l = l[:i] + (tid,) + l[i + 1:]
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
            threads = threads + (child,)
        elif op == JOIN:
            frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        else:  # pragma: no cover - invisible ops are normalized away
            raise ExecutionError(f"unexpected opcode {op}")
        thread = self._normalize((root, frames, sd, wd, holds))
        threads = threads[:cur] + (thread,) + threads[cur + 1:]
        return (g, threads, cur, tg, nsw), ev, failed

    def yield_options(self, state):
        """Decisions available at the running thread's yield, canonical order."""
        g, threads, cur, tg, nsw = state
        thread = threads[cur]
        ins = self._instr(thread)
        if not self._can_switch(state, thread, ins):
            return [("stay",)]
        if self._locked_yield(thread, ins):
            s = self.c.lock_slot
            g = g[:s] + (True,) + g[s + 1:]
        others = self._enabled_threads(g, threads, exclude=cur)
        return [("switch", u) for u in others] + [("stay",)]

    def apply(self, state, decision):
        """Apply a scheduling decision; returns ``(state, events)``."""
        g, threads, cur, tg, nsw = state
        if decision[0] == "run":
            return (g, threads, decision[1], tg, nsw), []
        self._tick()
        thread = threads[cur]
        root, frames, sd, wd, holds = thread
        p, pc, l, ret, sb, wb = frames[-1]
        ins = self.c.proc_list[p].code[pc]
        gid = ins.b
        if decision[0] == "stay":
            ev = Event(cur, ins.loc, "yield", ins.a, gid, False)
            frames = frames[:-1] + ((p, pc + 2, l, ret, sb, wb),)
            thread = self._normalize((root, frames, sd, wd, holds))
            threads = threads[:cur] + (thread,) + threads[cur + 1:]
            return (g, threads, cur, tg, nsw), [ev]
        ev = Event(cur, ins.loc, "yield", ins.a, gid, True)
        if self._locked_yield(thread, ins):
            s = self.c.lock_slot
            g = g[:s] + (True,) + g[s + 1:]
            holds = True
        frames = frames[:-1] + ((p, pc + 1, l, ret, sb, wb),)
        threads = threads[:cur] + ((root, frames, sd, wd, holds),) + threads[cur + 1:]
        if gid is not None and gid in self.tracked:
            tg = tg | {gid}
        return (g, threads, decision[1], tg, nsw + 1), [ev]

    def run(self, state):
        """Run deterministically until a choice point, a bug or a dead end.

        Returns ``(kind, state, events, info)`` with kind ``"choice"`` (info:
        the options), ``"bug"`` (info: failed location) or ``"leaf"``.
        """
        events = []
        try:
            while True:
                g, threads, cur, tg, nsw = state
                if self._lock_blocked(g, threads[cur]):
                    # the lock encoding's assume fails: the schedule is infeasible
                    return "leaf", state, events, None
                if not self._enabled(g, threads, cur):
                    others = self._enabled_threads(g, threads, exclude=cur)
                    if not others:
                        return "leaf", state, events, None
                    if len(others) > 1:
                        return "choice", state, events, [("run", u) for u in others]
                    state = (g, threads, others[0], tg, nsw)
                    continue
                ins = self._instr(threads[cur])
                if ins.op == YIELD:
                    options = self.yield_options(state)
                    if len(options) > 1:
                        return "choice", state, events, options
                    state, evs = self.apply(state, options[0])
                    events.extend(evs)
                else:
                    self._tick()
                    state, ev, failed = self._step(state)
                    events.append(ev)
                    if failed is not None:
                        return "bug", state, events, failed
                self._check_axioms(state[0])
        except _Prune:
            return "leaf", state, events, None

    def memo_key(self, state):
        g, threads, cur, tg, nsw = state
        return (g, threads, cur, tg, nsw if self.budget.cs_bound is not None else 0)

    def thread_names(self, state):
        return tuple(t[0] for t in state[1])

    def explore(self):
        """Depth-first search for the first assertion failure."""
        visited = set()
        path = []
        decisions = []
        stack = []  # [state, options, next index, path length]
        state = self.initial()
        try:
            self._check_axioms(state[0])
        except _Prune:
            return Correct(0, 0)
        kind, state, evs, info = self.run(state)
        path.extend(evs)
        while True:
            if kind == "bug":
                trace = Trace(tuple(path), info, tuple(decisions), self.thread_names(state))
                return Bug(trace, self.states, self.steps)
            if kind == "choice":
                key = self.memo_key(state)
                if key not in visited:
                    visited.add(key)
                    self.states += 1
                    stack.append([state, info, 0, len(path)])
            while stack:
                top = stack[-1]
                if top[2] < len(top[1]):
                    opt = top[1][top[2]]
                    top[2] += 1
                    del path[top[3]:]
                    del decisions[len(stack) - 1:]
                    decisions.append(opt)
                    state, evs = self.apply(top[0], opt)
                    path.extend(evs)
                    try:
                        self._check_axioms(state[0])
                    except _Prune:
                        kind = "leaf"
                        break
                    kind, state, evs, info = self.run(state)
                    path.extend(evs)
                    break
                stack.pop()
            else:
                return Correct(self.states, self.steps)

    def replay(self, choose):
        """Follow one schedule; ``choose(options, state, events)`` picks each decision."""
        path = []
        decisions = []
        state = self.initial()
        kind, state, evs, info = self.run(state)
        path.extend(evs)
        while kind == "choice":
            opt = choose(info, state, path)
            if opt not in info:
                raise ExecutionError(f"decision {opt!r} not available; options are {info!r}")
            decisions.append(opt)
            state, evs = self.apply(state, opt)
            path.extend(evs)
            try:
                self._check_axioms(state[0])
            except _Prune:
                kind = "leaf"
                break
            kind, state, evs, info = self.run(state)
            path.extend(evs)
        failed = info if kind == "bug" else None
        return Trace(tuple(path), failed, tuple(decisions), self.thread_names(state))


def verify(program, phi: Optional[Constraint] = None, budget: Optional[ExplorationBudget] = None):
    """Explore all schedules admitted by ``phi``; return Correct or Bug(trace)."""
    return Machine(program, phi, budget).explore()


def replay(program, trace_or_decisions, phi: Optional[Constraint] = None, budget: Optional[ExplorationBudget] = None) -> Trace:
    """Re-execute a schedule.

    Accepts a :class:`Trace` with recorded decisions, a plain decision list,
    or a trace loaded from a dump (events only), in which case each decision
    is read off the recorded events.
    """
    m = Machine(program, phi, budget)
    if isinstance(trace_or_decisions, Trace) and not trace_or_decisions.decisions and trace_or_decisions.events:
        recorded = trace_or_decisions.events

        def choose(options, state, path):
            i = len(path)
            if i >= len(recorded):
                raise ExecutionError("recorded trace ended before the schedule did")
            nxt = recorded[i]
            if options[0][0] == "run":
                return ("run", nxt.thread)
            if nxt.switched:
                if i + 1 >= len(recorded):
                    raise ExecutionError("recorded trace ends right after a switch")
                return ("switch", recorded[i + 1].thread)
            return ("stay",)

        return m.replay(choose)
    decisions = list(trace_or_decisions.decisions if isinstance(trace_or_decisions, Trace) else trace_or_decisions)
    it = iter(decisions)

    def choose(options, state, path):
        try:
            return tuple(next(it))
        except StopIteration:
            raise ExecutionError("decision list exhausted before the schedule ended") from None

    return m.replay(choose)
