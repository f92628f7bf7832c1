"""Driving the experiments through the schiffer command line."""
import json
import tempfile
from pathlib import Path

from schiffer import cli

print(cli.list_scenarios())
with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "run"
    code = cli.main(["run", "torus_two_bands", "--basis-size", "6", "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    print("exit code", code, "| overall pass:", report["pass"])
    for s in report["suites"]:
        print(f"  {s['suite']:20s} pass={s['pass']}")
    print("files written:", sorted(p.name for p in out.iterdir()))
