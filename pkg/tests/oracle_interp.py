"""A deliberately naive reference interpreter used as a test oracle.

It shares only the parser and the yield-insertion pass with the package.
Threads are Python generators that suspend at every yield; the scheduler
re-executes the program from scratch for every schedule prefix and
enumerates all choices depth-first.  Slow, but simple enough to trust.

Supported subset: scalar globals, locals, assignment, if, bounded while,
assert, assume (waits), satomic, parameterless calls, async and join.
"""

from __future__ import annotations

import random

from atomfix.lang.syntax import (
    Assert,
    Assign,
    Assume,
    Async,
    Atomic,
    Binary,
    Call,
    Const,
    Decl,
    If,
    Join,
    Name,
    Return,
    Unary,
    While,
    Yield,
)


class _Failed(Exception):
    pass


class _Returned(Exception):
    pass


def _c_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _eval(e, env, g):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Name):
        return env[e.id] if e.id in env else g[e.id]
    if isinstance(e, Unary):
        v = _eval(e.operand, env, g)
        return (not v) if e.op == "!" else -v
    if isinstance(e, Binary):
        if e.op == "&&":
            return bool(_eval(e.left, env, g)) and bool(_eval(e.right, env, g))
        if e.op == "||":
            return bool(_eval(e.left, env, g)) or bool(_eval(e.right, env, g))
        a, b = _eval(e.left, env, g), _eval(e.right, env, g)
        return {
            "+": lambda: a + b,
            "-": lambda: a - b,
            "*": lambda: a * b,
            "/": lambda: _c_div(a, b),
            "%": lambda: a - b * _c_div(a, b),
            "==": lambda: a == b,
            "!=": lambda: a != b,
            "<": lambda: a < b,
            "<=": lambda: a <= b,
            ">": lambda: a > b,
            ">=": lambda: a >= b,
        }[e.op]()
    raise NotImplementedError(type(e).__name__)


class _World:
    def __init__(self, program):
        self.program = program
        self.g = {v.name: (_eval(v.init, {}, {}) if v.init is not None else 0) for v in program.globals}
        self.threads = []  # [generator, wait predicate or None, done]

    def spawn(self, proc_name):
        gen = self.body(self.program.procedures[proc_name].body, {})
        self.threads.append([gen, None, False])
        return len(self.threads) - 1

    def body(self, stmts, env):
        for s in stmts:
            yield from self.stmt(s, env)

    def stmt(self, s, env):
        g = self.g
        if isinstance(s, Yield):
            yield None
        elif isinstance(s, Decl):
            env[s.name] = _eval(s.init, env, g) if s.init is not None else 0
        elif isinstance(s, Assign):
            v = _eval(s.value, env, g)
            if s.target.id in env:
                env[s.target.id] = v
            else:
                g[s.target.id] = v
        elif isinstance(s, If):
            yield from self.body(s.then if _eval(s.cond, env, g) else s.orelse, env)
        elif isinstance(s, While):
            count = 0
            while True:
                # bound exhausted: wait until the condition turns false
                while _eval(s.cond, env, g) and count >= s.bound:
                    yield (lambda: not _eval(s.cond, env, g))
                if not _eval(s.cond, env, g):
                    break
                count += 1
                yield from self.body(s.body, env)
        elif isinstance(s, Assert):
            if not _eval(s.cond, env, g):
                raise _Failed(s.loc)
        elif isinstance(s, Assume):
            while not _eval(s.cond, env, g):
                yield (lambda: bool(_eval(s.cond, env, g)))
        elif isinstance(s, Atomic):
            yield from self.body(s.body, env)
        elif isinstance(s, Call):
            try:
                yield from self.body(self.program.procedures[s.proc].body, {})
            except _Returned:
                pass
        elif isinstance(s, Async):
            env[s.target] = self.spawn(s.proc)
        elif isinstance(s, Join):
            t = self.threads[env[s.handle]]
            while not t[2]:
                yield (lambda: t[2])
        elif isinstance(s, Return):
            raise _Returned()
        else:
            raise NotImplementedError(type(s).__name__)


def _run(program, prefix):
    """Run one schedule; returns (failed?, number of options at each choice)."""
    world = _World(program)
    world.spawn("main")
    counts = []
    cur = 0
    while True:
        t = world.threads[cur]
        try:
            t[1] = next(t[0])
        except StopIteration:
            t[2] = True
        except _Failed:
            return True, counts
        except _Returned:
            t[2] = True
        options = [i for i, th in enumerate(world.threads) if not th[2] and (th[1] is None or th[1]())]
        if not options:
            return False, counts
        k = len(counts)
        counts.append(len(options))
        cur = options[prefix[k] if k < len(prefix) else 0]


def has_bug(program, max_runs=500_000) -> bool:
    """Exhaustively search every schedule of an instrumented program for an assertion failure."""
    stack = [[]]
    runs = 0
    while stack:
        prefix = stack.pop()
        runs += 1
        if runs > max_runs:
            raise RuntimeError("oracle schedule budget exhausted")
        failed, counts = _run(program, prefix)
        if failed:
            return True
        for i in range(len(prefix), len(counts)):
            base = prefix + [0] * (i - len(prefix))
            for alt in range(1, counts[i]):
                stack.append(base + [alt])
    return False


# --------------------------------------------------------------------------
# Random programs
# --------------------------------------------------------------------------


def random_source(rng: random.Random, n_workers=None) -> str:
    """A small random MiniConc program over globals ``x`` and ``y``."""
    n_workers = rng.randint(1, 2) if n_workers is None else n_workers
    lines = ["int x = 0;", "int y = 0;", "", "void bump() {", "  x = x + 1;", "}", ""]
    for w in range(n_workers):
        lines.append(f"void worker{w}() {{")
        for k in range(rng.randint(1, 3)):
            choice = rng.randrange(9)
            if choice == 0:
                lines.append("  x = x + 1;")
            elif choice == 1:
                lines += [f"  int a{k} = x;", f"  x = a{k} + 1;"]
            elif choice == 2:
                lines.append("  y = x;")
            elif choice == 3:
                lines += ["  if (x > 1) {", "    y = y + 1;", "  }"]
            elif choice == 4:
                lines.append(f"  assert(x <= {rng.randint(1, 3)});")
            elif choice == 5:
                lines += ["  satomic {", "    x = x + 1;", "  }"]
            elif choice == 6:
                lines += ["  while (y < 2) @bound(2) {", "    y = y + 1;", "  }"]
            elif choice == 7:
                lines.append("  bump();")
            else:
                lines.append(f"  assume(x > {rng.randint(0, 1)});")
        lines += ["}", ""]
    lines.append("void main() {")
    for w in range(n_workers):
        lines.append(f"  t{w} = async worker{w}();")
    for w in range(n_workers):
        lines.append(f"  join(t{w});")
    var = rng.choice("xy")
    lines.append(f"  assert({var} {rng.choice(['==', '!=', '<=', '>='])} {rng.randint(0, 3)});")
    lines.append("}")
    return "\n".join(lines) + "\n"
