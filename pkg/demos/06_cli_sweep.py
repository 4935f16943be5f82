"""Drive the command-line pipeline from Python.

Equivalent shell session:

    btc sweep --config demo.cfg --output demo_out --workers 4
"""
# %%
import tempfile
from pathlib import Path

from btcgmc.cli import main
from btcgmc.records import Manifest, read_csv_columns

work = Path(tempfile.mkdtemp(prefix="btc_demo_"))
cfg = work / "demo.cfg"
cfg.write_text(
    "N = 8, 16, 32\n"
    "omega0 = 0.5:2:0.5\n"
    "k_list = 1, 2, 3\n"
    "commands = ness, thermo\n"
)
rc = main(["sweep", "--config", str(cfg), "--output", str(work / "out"), "--workers", "2"])
print("exit code", rc)

# %%
cols = read_csv_columns(work / "out" / "ness.csv")
for N, w, i1, f in zip(cols["N"], cols["omega0"], cols["I1"], cols["Fmax"]):
    print(f"N={int(N):3d} omega0={w:.1f}  I1={i1:.4f}  Fmax/N={f / N:.3f}")

m = Manifest.load(work / "out")
print(m.keys["state"], "-", len(m.tasks), "tasks,", len(m.digests), "files hashed")
print("outputs in", work / "out")
