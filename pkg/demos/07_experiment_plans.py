"""Drive a reproducible experiment through the CLI runner.

Plans are plain JSON; identical plans reproduce byte-identical CSV output,
and interrupted runs resume from the next unused sample index.
"""

import json
import subprocess
import tempfile
from pathlib import Path

plan = {
    "name": "demo-one-arm",
    "subcommand": "one-arm",
    "spec": {"d": 1, "model": "nn"},
    "p": 0.75,
    "scales": [2, 4, 8],
    "n_samples": 40_000,
    "master_seed": 9,
    "budget": {"max_vertices": 2000},
    "fit_min_scale": 2,
}

with tempfile.TemporaryDirectory() as tmp:
    plan_path = Path(tmp) / "plan.json"
    plan_path.write_text(json.dumps(plan))
    subprocess.run(
        ["perc", "one-arm", "--config", str(plan_path), "--out", tmp], check=True
    )
    print((Path(tmp) / "demo-one-arm.csv").read_text())
    record = json.loads((Path(tmp) / "demo-one-arm.json").read_text())
    print("fitted slope:", record["fit"]["slope"])
    subprocess.run(
        ["perc", "fit", str(Path(tmp) / "demo-one-arm.csv")], check=True
    )
