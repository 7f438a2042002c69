import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomfix.errors import ParseError, UnboundedLoop
from atomfix.lang import insert_yields, instrument, instrument_weak, parse, render_source
from atomfix.lang.syntax import Atomic, Yield, walk
from oracle_interp import random_source

SIMPLE = """
int x = 0;

void worker() {
  int a = 1;
  x = x + a;
  a = a + 1;
}

void main() {
  t = async worker();
  x = 2;
  join(t);
}
"""


def yields_of(program, proc):
    return [s for s in walk(program.procedures[proc].body) if isinstance(s, Yield)]


def test_parse_records_locations():
    p = parse(SIMPLE)
    body = p.procedures["worker"].body
    assert [s.loc.line for s in body] == [5, 6, 7]
    assert str(body[1].loc) == "worker:6"


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as err:
        parse("int x = 0;\nvoid main() {\n  x = ;\n}\n")
    assert err.value.line == 3


def test_loop_without_bound_rejected():
    with pytest.raises(UnboundedLoop):
        parse("int x;\nvoid main() {\n  while (x < 3) {\n    x = x + 1;\n  }\n}\n")


def test_bound_annotation_positions():
    for text in ("@bound(2) while (x < 3) {", "while @bound(2) (x < 3) {", "while (x < 3) @bound(2) {"):
        p = parse(f"int x;\nvoid main() {{\n  {text}\n    x = x + 1;\n  }}\n}}\n")
        assert p.main.body[0].bound == 2


def test_yield_before_each_shared_access_only():
    p = instrument(parse(SIMPLE))
    worker = p.procedures["worker"].body
    kinds = [type(s).__name__ for s in worker]
    # entry yield, local decl, yield + shared write, local write
    assert kinds == ["Yield", "Decl", "Yield", "Assign", "Assign"]
    assert worker[0].entry and worker[0].excluded
    assert not worker[2].excluded


def test_main_has_no_entry_yield():
    p = instrument(parse(SIMPLE))
    first = p.main.body[0]
    assert not (isinstance(first, Yield) and first.entry)


def test_guard_ids_dense_and_excluded_last():
    p = instrument(parse(SIMPLE))
    n = len(p.guard_ids)
    assert p.guard_ids == list(range(n))
    assert all(y.excluded for y in p.yields[n:])
    assert all(not y.excluded for y in p.yields[:n])


def test_sync_yield_excluded():
    p = instrument(parse("int x;\nvoid main() {\n  @sync yield;\n  x = 1;\n}\n"))
    ys = yields_of(p, "main")
    assert ys[0].sync and ys[0].excluded and ys[0].yid not in p.guard_ids


def test_no_yields_inside_satomic_and_locked_inside_watomic():
    src = "int x;\nvoid main() {\n  satomic {\n    x = 1;\n    x = 2;\n  }\n  watomic {\n    x = 3;\n  }\n}\n"
    p = instrument(parse(src))
    blocks = [s for s in p.main.body if isinstance(s, Atomic)]
    assert not any(isinstance(s, Yield) for s in walk(blocks[0].body))
    inner = [s for s in walk(blocks[1].body) if isinstance(s, Yield)]
    assert inner and all(y.locked and y.excluded for y in inner)
    assert p.lock_var is not None


def test_shared_loop_condition_gets_back_edge_yield():
    src = "int x;\nvoid main() {\n  while (x < 2) @bound(3) {\n    int a = 0;\n  }\n}\n"
    p = instrument(parse(src))
    loop = [s for s in p.main.body if not isinstance(s, Yield)][0]
    assert isinstance(loop.body[-1], Yield)


def test_instrument_weak_requires_guards():
    with pytest.raises(ValueError):
        instrument_weak(parse(SIMPLE))
    w = instrument_weak(instrument(parse(SIMPLE)))
    assert w.weak and all(y.weak for proc in w.procedures.values() for y in walk(proc.body) if isinstance(y, Yield))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_insert_yields_idempotent(seed):
    p = parse(random_source(random.Random(seed)))
    once = insert_yields(p)
    twice = insert_yields(once)
    assert render_source(once, instrumented=True) == render_source(twice, instrumented=True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_render_parse_round_trip(seed):
    text = render_source(parse(random_source(random.Random(seed))))
    assert render_source(parse(text)) == text


def test_corpus_round_trip(banking_source, banking_corpus_source):
    for src in (banking_source, banking_corpus_source):
        text = render_source(parse(src))
        assert render_source(parse(text)) == text
