"""Generated benchmark programs and access to the bundled corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def parameterized_source(p1: int, p2: int, p3: int) -> str:
    """Two threads over shared ``x`` and ``y``.

    The first writes ``x``, does ``p1`` writes to ``y`` and asserts ``x`` is
    unchanged; the second does ``p2`` writes to ``x`` then ``p3`` irrelevant
    writes to ``y``.
    """
    lines = ["int x = 0;", "int y = 0;", "", "void thread1() {", "  x = 10;"]
    lines += ["  y = 1;"] * p1
    lines += ["  assert(x == 10);", "}", "", "void thread2() {"]
    lines += ["  x = 1;"] * p2
    lines += ["  y = 1;"] * p3
    lines += [
        "}",
        "",
        "void main() {",
        "  t1 = async thread1();",
        "  t2 = async thread2();",
        "  join(t1);",
        "  join(t2);",
        "}",
    ]
    return "\n".join(lines) + "\n"


def redundant_source(n: int) -> str:
    """One racy write followed by ``n - 1`` redundant shared writes.

    The second thread ends up with ``n`` guarded yields; only the yield
    between the first thread's write and its assertion matters.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    lines = ["int x = 0;", "int tmp = 0;", "", "void thread1() {", "  x = 10;", "  assert(x == 10);", "}", ""]
    lines += ["void thread2() {", "  x = 5;"] + ["  tmp = 1;"] * (n - 1) + ["}", ""]
    lines += [
        "void main() {",
        "  t1 = async thread1();",
        "  t2 = async thread2();",
        "  join(t1);",
        "  join(t2);",
        "}",
    ]
    return "\n".join(lines) + "\n"


def corpus_dir() -> Path:
    """Directory of the bundled ``.mc`` corpus with its expected-fix sidecars."""
    return Path(str(resources.files("atomfix") / "corpus"))


def corpus_programs() -> list:
    return sorted(corpus_dir().glob("*.mc"))
