#!/usr/bin/env python3
"""The whole pipeline through the CLI, stage by stage.

Equivalent to running on a shell:

    cdoxai --config demo.cfg synth
    cdoxai --config demo.cfg ingest
    cdoxai --config demo.cfg features
    cdoxai --config demo.cfg train
    cdoxai --config demo.cfg explain
    cdoxai --config demo.cfg fexai
    cdoxai --config demo.cfg report

Intermediate artifacts land in ./demo_out and every file header carries the
config hash and seed, so a rerun is byte-identical.
"""

import tempfile
from pathlib import Path

from cdoxai.cli import main

out_dir = Path("demo_out")

CONFIG = f"""\
seed = 99
out_dir = {out_dir}
n_flights = 150
n_trees = 10
max_depth = 6
min_leaf = 2
n_rounds = 12
learning_rate = 0.25
boost_depth = 3
"""

with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
    fh.write(CONFIG)
    cfg_path = fh.name

for command in ("synth", "ingest", "features", "train", "explain", "fexai", "report"):
    code = main(["--config", cfg_path, command])
    assert code == 0, f"{command} exited with {code}"

print("\nartifacts:")
for path in sorted(out_dir.iterdir()):
    print(f"  {path} ({path.stat().st_size} bytes)")
