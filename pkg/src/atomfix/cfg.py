"""Per-procedure control-flow graphs and atomic-region reconstruction.

Nodes are statement locations.  Inserted yields are not nodes of their own:
they sit on the edge into the statement they precede.  Explicit source
yields are ordinary nodes.  Every procedure gets a synthetic entry node
(statement index -1) and exit node (index -2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import RegionNotLexical
from .lang.syntax import Atomic, If, Location, Program, Return, While, Yield, walk


def entry_node(proc) -> Location:
    return Location(proc.name, -1, proc.line)


def exit_node(proc) -> Location:
    return Location(proc.name, -2, 0)


def is_pseudo(n: Location) -> bool:
    return n.index < 0


@dataclass
class ProcCfg:
    proc: str
    entry: Location
    exit: Location
    succ: dict = field(default_factory=dict)  # Location -> list of Location
    back_edges: dict = field(default_factory=dict)  # (src, loop head) -> bound

    @property
    def nodes(self) -> list:
        return list(self.succ)

    def edges(self):
        for u, vs in self.succ.items():
            for v in vs:
                yield u, v

    def preds(self) -> dict:
        out = {n: [] for n in self.succ}
        for u, v in self.edges():
            out[v].append(u)
        return out


@dataclass
class Cfg:
    procs: dict = field(default_factory=dict)  # name -> ProcCfg

    def of(self, loc: Location) -> ProcCfg:
        return self.procs[loc.proc]

    @property
    def nodes(self) -> list:
        return [n for pc in self.procs.values() for n in pc.succ]

    def edges(self):
        for pc in self.procs.values():
            yield from pc.edges()

    def to_dot(self) -> str:
        """Graphviz rendering, one cluster per procedure."""
        lines = ["digraph cfg {", "  node [shape=box, fontname=monospace];"]
        for i, pc in enumerate(self.procs.values()):
            lines.append(f"  subgraph cluster_{i} {{")
            lines.append(f'    label="{pc.proc}";')
            for n in pc.succ:
                label = "entry" if n == pc.entry else "exit" if n == pc.exit else f"{n.line}"
                lines.append(f'    "{_dot_id(n)}" [label="{pc.proc}:{label}"];')
            for u, v in pc.edges():
                bound = pc.back_edges.get((u, v))
                attr = f' [label="bound {bound}", style=dashed]' if bound is not None else ""
                lines.append(f'    "{_dot_id(u)}" -> "{_dot_id(v)}"{attr};')
            lines.append("  }")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_id(n: Location) -> str:
    return f"{n.proc}#{n.index}"


def build_cfg(program: Program) -> Cfg:
    """One CFG per procedure, restricted to nodes reachable from the entry."""
    cfg = Cfg()
    for proc in program.procedures.values():
        pc = ProcCfg(proc.name, entry_node(proc), exit_node(proc))
        succ = {pc.entry: [], pc.exit: []}

        def edge(u, v):
            if v not in succ[u]:
                succ[u].append(v)

        def seq(body, follow):
            nxt = follow
            for stmt in reversed(body):
                if isinstance(stmt, Yield) and not stmt.explicit:
                    continue
                n = stmt.loc
                succ.setdefault(n, [])
                if isinstance(stmt, If):
                    edge(n, seq(stmt.then, nxt))
                    edge(n, seq(stmt.orelse, nxt))
                elif isinstance(stmt, While):
                    inner = {s.loc for s in walk(stmt.body)}
                    first = seq(stmt.body, n)
                    edge(n, first)
                    edge(n, nxt)
                    for u in inner | {n}:
                        if n in succ.get(u, ()) and (u in inner or first == n):
                            pc.back_edges[u, n] = stmt.bound
                elif isinstance(stmt, Atomic):
                    edge(n, seq(stmt.body, nxt))
                elif isinstance(stmt, Return):
                    edge(n, pc.exit)
                else:
                    edge(n, nxt)
                nxt = n
            return nxt

        edge(pc.entry, seq(proc.body, pc.exit))
        reach = _reachable(succ, pc.entry)
        reach.add(pc.exit)
        pc.succ = {n: [v for v in vs if v in reach] for n, vs in succ.items() if n in reach}
        pc.back_edges = {e: b for e, b in pc.back_edges.items() if e[0] in reach}
        cfg.procs[proc.name] = pc
    return cfg


def _reachable(succ, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        for v in succ.get(stack.pop(), ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


# --------------------------------------------------------------------------
# Dominators
# --------------------------------------------------------------------------


def dominators(succ: dict, entry) -> dict:
    """Iterative data-flow dominator sets over nodes reachable from ``entry``."""
    nodes = list(_reachable(succ, entry))
    order = _rpo(succ, entry)
    preds = {n: [] for n in nodes}
    for u in nodes:
        for v in succ.get(u, ()):
            if v in preds:
                preds[v].append(u)
    everything = set(nodes)
    dom = {n: set(everything) for n in nodes}
    dom[entry] = {entry}
    changed = True
    while changed:
        changed = False
        for n in order:
            if n == entry:
                continue
            ps = [dom[p] for p in preds[n]]
            new = set.intersection(*ps) if ps else set()
            new.add(n)
            if new != dom[n]:
                dom[n] = new
                changed = True
    return dom


def _rpo(succ, entry) -> list:
    seen = set()
    out = []
    stack = [(entry, iter(succ.get(entry, ())))]
    seen.add(entry)
    while stack:
        node, it = stack[-1]
        for v in it:
            if v not in seen:
                seen.add(v)
                stack.append((v, iter(succ.get(v, ()))))
                break
        else:
            stack.pop()
            out.append(node)
    return out[::-1]


def reverse(succ: dict) -> dict:
    out = {n: [] for n in succ}
    for u, vs in succ.items():
        for v in vs:
            out.setdefault(v, []).append(u)
    return out


def post_dominators(pc: ProcCfg) -> dict:
    return dominators(reverse(pc.succ), pc.exit)


# --------------------------------------------------------------------------
# Regions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    locations: frozenset
    lexical: Optional[tuple] = None  # (dominator, post-dominator)

    @property
    def proc(self) -> Optional[str]:
        procs = {n.proc for n in self.locations}
        return procs.pop() if len(procs) == 1 else None

    def sorted(self) -> list:
        return sorted(self.locations, key=lambda n: (n.proc, n.index))

    def to_json(self) -> dict:
        return {
            "locations": [str(n) for n in self.sorted()],
            "lexical": None if self.lexical is None else [str(self.lexical[0]), str(self.lexical[1])],
        }


def protected_points(program: Program, cfg: Cfg, yid: int) -> set:
    """Statements a chosen yield's atomic block must cover.

    An inserted yield separates the statement it precedes from each statement
    that can run right before it, so the block covers all of them.  Those
    predecessors are followed further back until a statement that already had
    a yield in front of it: starting the block any later would put a new
    switch point at its boundary.  An explicit yield is its own statement.
    """
    y = program.yields[yid]
    loc = y.location
    if loc.index < 0:
        return set()
    explicit = set()
    preceded = set()
    for stmt in program.statements():
        if isinstance(stmt, Yield):
            if stmt.explicit:
                explicit.add(stmt.loc)
                if stmt.yid == yid:
                    return {loc}
            else:
                preceded.add(stmt.loc)
    pc = cfg.of(loc)
    if loc not in pc.succ:
        return set()
    preds = pc.preds()
    points = {loc}
    stack = [loc]
    while stack:
        n = stack.pop()
        for p in preds[n]:
            if is_pseudo(p) or p in explicit or p in points:
                continue
            points.add(p)
            if p not in preceded:
                stack.append(p)
    return points


def connected_regions(cfg: Cfg, s) -> list:
    """Split ``s`` into maximal groups linked by CFG edges that stay inside ``s``."""
    s = set(s)
    adj = {n: set() for n in s}
    for u, v in cfg.edges():
        if u in s and v in s:
            adj[u].add(v)
            adj[v].add(u)
    regions = []
    seen = set()
    for n in sorted(s, key=lambda x: (x.proc, x.index)):
        if n in seen:
            continue
        comp = set()
        stack = [n]
        seen.add(n)
        while stack:
            u = stack.pop()
            comp.add(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        regions.append(Region(frozenset(comp)))
    return regions


def _nearest_common(sets_by_node: dict, nodes) -> Location:
    common = set.intersection(*(sets_by_node[n] for n in nodes))
    # the nearest one is dominated by all the others
    for c in common:
        if all(d in sets_by_node[c] for d in common):
            return c
    raise RegionNotLexical("no common dominator")  # pragma: no cover


def lexicalize(cfg: Cfg, region: Region) -> Region:
    """Grow a region to everything between its common dominator and post-dominator.

    Repeats until stable, so the result is its own lexicalization.
    """
    procs = {n.proc for n in region.locations}
    if len(procs) != 1:
        raise RegionNotLexical("region spans several procedures" if procs else "empty region")
    pc = cfg.procs[procs.pop()]
    dom = dominators(pc.succ, pc.entry)
    pdom = post_dominators(pc)
    locs = set(region.locations)
    missing = [n for n in locs if n not in dom or n not in pdom]
    if missing:
        raise RegionNotLexical(f"{missing[0]} is not a node of the control-flow graph")
    while True:
        d = _nearest_common(dom, locs)
        p = _nearest_common(pdom, locs)
        span = {n for n in pc.succ if d in dom[n] and n in pdom and p in pdom[n]}
        grown = locs | {n for n in span | {d, p} if not is_pseudo(n)}
        if grown == locs:
            return Region(frozenset(locs), (d, p))
        locs = grown


def fix_regions(program: Program, cfg: Cfg, guards, lexical: bool = False) -> list:
    """Regions for a set of chosen guard ids."""
    points = set()
    for g in guards:
        points |= protected_points(program, cfg, g)
    regions = connected_regions(cfg, points)
    if lexical:
        regions = [lexicalize(cfg, r) for r in regions]
    return regions
