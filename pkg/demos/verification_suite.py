"""Run the full default verification suite through the library API.

Equivalent to `roughfrac run configs/default.ini`; reports land in
reports/ as deterministic JSON plus a CSV summary.
"""

from pathlib import Path

from roughfrac.cli import parse_config, run_suite

config = Path(__file__).resolve().parent.parent / "configs" / "default.ini"
suite = parse_config(config.read_text())
print(f"running {len(suite.invocations)} checks from {config.name}")
code = run_suite(suite, out_dir="reports")
print(f"exit status {code}")
print((Path("reports") / "summary.csv").read_text())
