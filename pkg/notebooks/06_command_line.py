# %% [markdown]
# # Manifests and the command line
#
# One TOML manifest describes one experiment. `sclab run` writes a JSON
# record (plus CSV tables where relevant) and exits 0 when every claim in it
# holds; `sclab report` folds a directory of records into one row per claim.

# %%
import tempfile
from pathlib import Path

from sclab.cli import main

root = Path(__file__).resolve().parents[1] if "__file__" in globals() else Path.cwd().parent
out = Path(tempfile.mkdtemp())
for name in ("c01_nishimori", "c09_maxwell"):
    print("exit", main(["run", str(root / "manifests" / "acceptance" / f"{name}.toml"), "--out", str(out), "--threads", "1"]))

# %%
main(["report", str(out)])
