"""Pretty-printing of programs, repaired programs and JSON reports."""

from __future__ import annotations

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
    If,
    Join,
    Name,
    Program,
    Ref,
    Return,
    Unary,
    While,
    Yield,
    children,
)

PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
ALLOWED_MARK = "// --> context switch allowed"


def render_expr(e, records=frozenset(), prec=0) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Field):
        return f"{e.base}{'->' if e.base in records else '.'}{e.field}"
    if isinstance(e, Ref):
        return f"&{e.name}"
    if isinstance(e, Unary):
        text = e.op + render_expr(e.operand, records, 7)
        return f"({text})" if prec > 7 else text
    if isinstance(e, Binary):
        p = PREC[e.op]
        text = f"{render_expr(e.left, records, p)} {e.op} {render_expr(e.right, records, p + 1)}"
        return f"({text})" if prec > p else text
    raise TypeError(f"not an expression: {e!r}")


class _Printer:
    def __init__(self, program: Program, instrumented=False, wraps=None, chosen=frozenset(), block_kw="satomic"):
        self.program = program
        self.instrumented = instrumented
        self.wraps = wraps or {}  # id(block) -> list of (i, j)
        self.chosen = chosen
        self.block_kw = block_kw
        self.lines = []
        self.records = frozenset()

    def out(self, depth, text):
        self.lines.append("  " * depth + text)

    def expr(self, e):
        return render_expr(e, self.records)

    def args(self, args):
        return ", ".join(self.expr(a) for a in args)

    def program_text(self) -> str:
        p = self.program
        struct_vars = {}
        for g in p.globals:
            if g.type in p.structs:
                struct_vars.setdefault(g.type, []).append(g.name)
        for name, fields in p.structs.items():
            self.out(0, f"struct {name} {{")
            for f in fields:
                self.out(1, f"int {f};")
            names = struct_vars.get(name)
            self.out(0, "}" + (" " + ", ".join(names) if names else "") + ";")
        for g in p.globals:
            if g.type in p.structs or (g.name == p.lock_var and not self.instrumented):
                continue
            init = f" = {self.expr(g.init)}" if g.init is not None else ""
            self.out(0, f"{g.type} {g.name}{init};")
        for ax in p.axioms:
            self.out(0, f"axiom({self.expr(ax)});")
        for proc in p.procedures.values():
            self.lines.append("")
            self.records = frozenset(x.name for x in proc.params if x.is_record)
            params = ", ".join(f"{x.type}* {x.name}" if x.is_record else f"{x.type} {x.name}" for x in proc.params)
            bound = f"@bound({proc.bound}) " if proc.bound is not None else ""
            self.out(0, f"{bound}{proc.ret_type} {proc.name}({params}) {{")
            self.block(proc.body, 1, False)
            self.out(0, "}")
        if self.instrumented and p.guard_ids:
            self.lines.append("")
            self.out(0, "const bool " + ", ".join(f"cs{g}" for g in p.guard_ids) + ";")
        return "\n".join(self.lines).lstrip("\n") + "\n"

    def block(self, body, depth, inside):
        ranges = [] if inside else sorted(self.wraps.get(id(body), []))
        i = 0
        while i < len(body):
            r = next((r for r in ranges if r[0] == i), None)
            if r is not None:
                self.out(depth, f"{self.block_kw} {{")
                for stmt in body[r[0]:r[1] + 1]:
                    self.stmt(stmt, depth + 1, True)
                self.out(depth, "}")
                i = r[1] + 1
                continue
            self.stmt(body[i], depth, inside)
            i += 1

    def stmt(self, s, depth, inside):
        if isinstance(s, Yield):
            self.yield_stmt(s, depth, inside)
        elif isinstance(s, Decl):
            init = f" = {self.expr(s.init)}" if s.init is not None else ""
            self.out(depth, f"{s.type} {s.name}{init};")
        elif isinstance(s, Assign):
            self.out(depth, f"{self.expr(s.target)} = {self.expr(s.value)};")
        elif isinstance(s, Call):
            call = f"{s.proc}({self.args(s.args)})"
            if s.target is None:
                self.out(depth, f"{call};")
            elif s.decl_type:
                self.out(depth, f"{s.decl_type} {self.expr(s.target)} = {call};")
            else:
                self.out(depth, f"{self.expr(s.target)} = {call};")
        elif isinstance(s, Async):
            call = f"async {s.proc}({self.args(s.args)})"
            self.out(depth, f"{s.target} = {call};" if s.target else f"{call};")
        elif isinstance(s, Join):
            self.out(depth, f"join({s.handle});")
        elif isinstance(s, If):
            self.out(depth, f"if ({self.expr(s.cond)}) {{")
            self.block(s.then, depth + 1, inside)
            if s.orelse:
                self.out(depth, "} else {")
                self.block(s.orelse, depth + 1, inside)
            self.out(depth, "}")
        elif isinstance(s, While):
            self.out(depth, f"while ({self.expr(s.cond)}) @bound({s.bound}) {{")
            self.block(s.body, depth + 1, inside)
            self.out(depth, "}")
        elif isinstance(s, Assert):
            self.out(depth, f"assert({self.expr(s.cond)});")
        elif isinstance(s, Assume):
            self.out(depth, f"assume({self.expr(s.cond)});")
        elif isinstance(s, Return):
            self.out(depth, "return;" if s.value is None else f"return {self.expr(s.value)};")
        elif isinstance(s, Atomic):
            self.out(depth, f"{s.kind} {{")
            self.block(s.body, depth + 1, inside)
            self.out(depth, "}")
        else:
            raise TypeError(f"cannot render {s!r}")

    def yield_stmt(self, y, depth, inside):
        if self.instrumented:
            lock = self.program.lock_var
            if y.excluded or y.yid is None:
                if y.locked:
                    self.out(depth, f"assume({lock} == false); {lock} = true; yield; {lock} = false;")
                else:
                    self.out(depth, ("@sync " if y.sync else "") + "yield;")
            elif y.weak:
                cs = f"cs{y.yid}"
                self.out(depth, f"if (!{cs}) {{ assume({lock} == false); {lock} = true; }} yield; if (!{cs}) {{ {lock} = false; }}")
            else:
                self.out(depth, f"if (cs{y.yid}) {{ yield; }}")
            return
        if y.explicit:
            self.out(depth, ("@sync " if y.sync else "") + "yield;")
        elif inside and not y.excluded and y.yid is not None and y.yid not in self.chosen:
            self.out(depth, ALLOWED_MARK)


def render_source(program: Program, instrumented: bool = False) -> str:
    """MiniConc text for a program; ``instrumented`` also shows inserted yields and guards."""
    return _Printer(program, instrumented).program_text()


def _chains(program: Program) -> dict:
    """Location -> path of (block id, index) pairs from the procedure body down."""
    out = {}

    def visit(body, prefix):
        for i, s in enumerate(body):
            path = prefix + ((id(body), i),)
            if not isinstance(s, Yield) or s.explicit:
                out.setdefault(s.loc, path)
            for child in children(s):
                visit(child, path)

    for proc in program.procedures.values():
        visit(proc.body, ())
    return out


def _wrap_range(chains, locations):
    paths = [chains[n] for n in locations if n in chains]
    if not paths:
        return None
    depth = 0
    while True:
        if any(len(p) <= depth for p in paths):
            break
        blocks = {p[depth][0] for p in paths}
        if len(blocks) != 1:
            break
        idx = {p[depth][1] for p in paths}
        if len(idx) != 1:
            return blocks.pop(), min(idx), max(idx), paths[0][:depth]
        depth += 1
    if depth == 0:
        return None
    # all locations share the statement at depth-1: wrap that statement
    last = paths[0][depth - 1]
    return last[0], last[1], last[1], paths[0][:depth - 1]


def wrap_ranges(program: Program, regions) -> dict:
    """Map each region to a statement range of one block; merge overlaps and nesting."""
    chains = _chains(program)
    found = []
    for r in regions:
        w = _wrap_range(chains, r.locations)
        if w is not None:
            found.append(w)
    # drop ranges nested inside another range's statements
    kept = []
    for b, i, j, prefix in found:
        nested = any(
            any(pb == b2 and i2 <= pi <= j2 for pb, pi in prefix)
            for b2, i2, j2, _ in found
            if (b2, i2, j2) != (b, i, j)
        )
        if not nested:
            kept.append((b, i, j))
    wraps = {}
    for b, i, j in sorted(set(kept), key=lambda t: (t[0], t[1])):
        rs = wraps.setdefault(b, [])
        if rs and i <= rs[-1][1] + 1:
            rs[-1] = (rs[-1][0], max(rs[-1][1], j))
        else:
            rs.append((i, j))
    return wraps


def render_fix(program: Program, fix) -> str:
    """Source with the fix's regions wrapped in ``satomic`` (strong) or ``watomic`` (weak) blocks.

    Inside a block, yields the fix leaves enabled are marked as places where a
    context switch is still allowed.
    """
    if not fix.chosen:
        return "// already correct: no atomic blocks needed\n" + render_source(program)
    kw = "satomic" if fix.kind == "strong" else "watomic"
    printer = _Printer(program, False, wrap_ranges(program, fix.regions), fix.chosen, kw)
    return printer.program_text()


def build_report(program: Program, fix=None, mode="strong", algorithm="optimized", status="fixed", message=None, stats=None) -> dict:
    """The machine-readable run report."""
    report = {
        "mode": mode,
        "algorithm": algorithm,
        "status": status,
        "guards": [{"id": y.id, "loc": str(y.location), "excluded": y.excluded} for y in program.yields] if program is not None else [],
        "fix": None,
        "stats": stats or {"algorithm": algorithm, "queries": 0, "traces": 0, "fix_size": 0, "elapsed_ms": 0.0},
    }
    if fix is not None:
        report["fix"] = {
            "kind": fix.kind,
            "chosen": sorted(fix.chosen),
            "strongCore": sorted(fix.strong_core),
            "regions": [r.to_json() for r in fix.regions],
        }
        if stats is None:
            report["stats"] = {"algorithm": algorithm, **fix.stats.to_json(), "fix_size": fix.size}
        if not fix.chosen:
            report["status"] = "already correct"
    if message:
        report["message"] = message
    return report
