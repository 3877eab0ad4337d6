"""
From a shift script to diagnostics through the command line
===========================================================

Writes a script and an experiment config, then drives ``drifteval synth``,
``drifteval run`` and ``drifteval diagnose`` exactly as a shell user would.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="drifteval-"))
work.mkdir(parents=True, exist_ok=True)

script = {
    "n_time_points": 6, "rows_per_time": 200, "base_rate": 0.4, "seed": 3,
    "features": [{"name": "a", "weight": 1.0}, {"name": "flag", "weight": 0.7, "kind": "binary"}],
    "events": [{"type": "feature_introduced", "feature": "b", "time": 3, "weight": 1.5},
               {"type": "sample_surge", "time": 4, "multiplier": 2}],
}
config = {
    "schema": "data.schema.json",   # written next to the data by `synth`
    "ratios": "0.8-0.1-0.1",
    "window": 2,
    "seeds": [0, 1],
    "regimes": ["sliding_window", "all_historical", "all_period"],
    "models": ["LR", {"kind": "GBDT", "grid": {"n_estimators": [20], "max_depth": [3]}}],
}
(work / "script.json").write_text(json.dumps(script, indent=2))
(work / "config.json").write_text(json.dumps(config, indent=2))


def drifteval(*args):
    cmd = [sys.executable, "-m", "drifteval", *args]
    print("$", " ".join(["drifteval", *args]))
    done = subprocess.run(cmd, capture_output=True, text=True)
    if done.returncode:
        print("exit", done.returncode, done.stderr.strip())
    return done.returncode


drifteval("synth", "--script", str(work / "script.json"), "--out", str(work / "data.csv"))
drifteval("run", "--config", str(work / "config.json"), "--data", str(work / "data.csv"),
          "--out", str(work / "results"), "--jobs", "2")
drifteval("diagnose", "--results", str(work / "results"), "--data", str(work / "data.csv"),
          "--out", str(work / "diagnostics"), "--top-k", "3")

print("\nfirst lines of results.csv:")
print("\n".join((work / "results" / "results.csv").read_text().splitlines()[:4]))
print("\ndiagnostics:", sorted(p.name for p in (work / "diagnostics").iterdir()))

# errors come back as one JSON object on stderr with exit status 2
drifteval("run", "--config", str(work / "config.json"), "--data", str(work / "missing.csv"),
          "--out", str(work / "nope"))
