"""Walk through repairing the banking program step by step.

Run with ``python3 demos/banking_walkthrough.py``.
"""

from atomfix.benchmarks import corpus_dir
from atomfix.cfg import build_cfg, fix_regions
from atomfix.inference import certify_minimality, fix_strong, fix_weak
from atomfix.lang import Fix, instrument, parse, render_fix, render_source
from atomfix.verifier import cs_of, verify, wcs_of

source = (corpus_dir() / "banking.mc").read_text()
program = instrument(parse(source))

# every shared access now sits behind a yield, and every yield that may be
# part of a fix is controlled by a guard constant csN
print(render_source(program, instrumented=True))
for y in program.yields:
    print(f"yield {y.id:>2} at {y.location}{' (excluded)' if y.excluded else ''}")

# the unconstrained program has a bug: here is the first counterexample
bug = verify(program)
print("\nfirst bug fails at", bug.trace.failed)
print("it switches at guards", sorted(cs_of(bug.trace)))
print("switch/pass conflict pairs", sorted(wcs_of(bug.trace)))

# repeatedly propose a minimum hitting set of the switch sets until no bug is left
strong = fix_strong(program)
print(f"\nstrong fix {sorted(strong.result.chosen)} after {strong.queries} verifier queries")
for i, t in enumerate(strong.traces):
    print(f"  trace {i}: switches at {sorted(cs_of(t))}")

cert = certify_minimality(program, strong.result)
print(f"no smaller fix exists: {cert.ok} ({cert.calls} verifier calls)")

regions = fix_regions(program, build_cfg(program), strong.result.chosen)
print("\n" + render_fix(program, Fix("strong", strong.result.chosen, strong.result.chosen, regions)))

# weak atomic blocks only exclude each other, so seize must be protected too
weak = fix_weak(program, strong.result.chosen)
regions = fix_regions(program, build_cfg(program), weak.result.chosen)
print(render_fix(program, Fix("weak", weak.result.chosen, strong.result.chosen, regions)))
