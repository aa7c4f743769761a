"""
Per-degree evaluation reports.

Run demos/04_toy_training.py first; this loads its fine-tuned checkpoint
and prints the per-degree PSNR/SSIM table under the matched policy (each
test record gets its own degree's query) and the swapped policy (queries
of degrees 1 and 9 exchanged, the mismatch ablation).
"""

from pathlib import Path

from fisheyelab.checkpoint import load_checkpoint
from fisheyelab.dataset import load_manifest
from fisheyelab.evaluate import evaluate, format_table

run = Path(__file__).parent / "out" / "toy_run"
ckpt = run / "finetuned.ckpt"
if not ckpt.is_file():
    raise SystemExit(f"no checkpoint at {ckpt}; run demos/04_toy_training.py first")

model, ckpt_id = load_checkpoint(ckpt)
manifest = load_manifest(run / "ds")

for policy in ("matched", "swapped"):
    report = evaluate(model, manifest, policy=policy, checkpoint_id=ckpt_id)
    print(format_table(report))
    print()

print("note: after a minute of toy training the gap between the two tables")
print("is small; the acceptance probe trains 2000 steps to make it reliable.")
