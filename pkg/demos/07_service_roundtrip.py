"""
HTTP service roundtrip without a network socket.

create_app gives a plain FastAPI app, so the test client can exercise
the exact request/response cycle the real server runs. The same app
serves over TCP via `fisheyelab serve --ckpt <finetuned.ckpt>`.

Run demos/04_toy_training.py first.
"""

import base64
import io
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from PIL import Image

from fisheyelab.checkpoint import load_checkpoint
from fisheyelab.dataset import load_manifest
from fisheyelab.service import create_app

run = Path(__file__).parent / "out" / "toy_run"
ckpt = run / "finetuned.ckpt"
if not ckpt.is_file():
    raise SystemExit(f"no checkpoint at {ckpt}; run demos/04_toy_training.py first")

model, ckpt_id = load_checkpoint(ckpt)
client = TestClient(create_app(model, ckpt_id))

print("GET /health  ->", client.get("/health").json())
print("GET /queries ->", client.get("/queries").json())

manifest = load_manifest(run / "ds")
record = manifest.split_records("test")[0]
fisheye_b64 = base64.b64encode((manifest.root / record.fisheye_path).read_bytes()).decode()
gt_b64 = base64.b64encode((manifest.root / record.gt_path).read_bytes()).decode()

resp = client.post(
    "/rectify",
    json={
        "image": fisheye_b64,
        "degree": record.degree_label,
        "return_metrics": True,
        "gt": gt_b64,
    },
)
body = resp.json()
rectified = np.asarray(
    Image.open(io.BytesIO(base64.b64decode(body["image"]))).convert("RGB")
)
print(
    f"POST /rectify (degree {record.degree_label}) -> {resp.status_code}, "
    f"{rectified.shape[1]}x{rectified.shape[0]} image, "
    f"psnr {body['psnr']:.2f} dB, ssim {body['ssim']:.4f}, "
    f"latency {body['latency_ms']:.0f} ms"
)

# the blend route is the degree route: one-hot weights give identical bytes
by_blend = client.post(
    "/rectify",
    json={"image": fisheye_b64, "blend": [1.0 if i == record.degree_label - 1 else 0.0
                                          for i in range(9)]},
).json()
print("degree request == one-hot blend request:", by_blend["image"] == body["image"])
