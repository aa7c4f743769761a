"""HTTP rectification service.

POST /rectify   body: {"image": b64 PNG, "degree" xor "blend", optional
                "return_metrics" + "gt"} -> rectified image plus metadata.
GET  /queries   query-set summary (count, shape, degree labels).
GET  /health    liveness with checkpoint id and uptime.

Malformed requests return 400 with a machine-readable error code; images
with a side over the configured maximum return 413. The model snapshot is
immutable for the process lifetime.
"""

from __future__ import annotations

import base64
import io
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel

from .errors import StateError, ValidationError
from .images import validate_image_buffer
from .infer import control_for_degree, control_from_blend, rectify_image
from .metrics import psnr, ssim
from .model import RectifierNet

MAX_SIDE = 1024


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


class RectifyPayload(BaseModel):
    image: str
    degree: int | None = None
    blend: list[float] | None = None
    return_metrics: bool = False
    gt: str | None = None


def _decode_image(b64: str, what: str) -> np.ndarray:
    try:
        raw = base64.b64decode(b64, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
        return validate_image_buffer(arr)
    except ApiError:
        raise
    except Exception as exc:
        raise ApiError(400, f"bad_{what}", f"could not decode {what} payload: {exc}") from exc


def _encode_image(img: np.ndarray) -> str:
    data = (np.rint(np.clip(img, 0.0, 1.0) * 255.0)).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _metric_value(v: float) -> float | str:
    return "inf" if np.isinf(v) else float(v)


def create_app(model: RectifierNet, checkpoint_id: str, max_side: int = MAX_SIDE) -> FastAPI:
    app = FastAPI(title="fisheyelab", docs_url=None, redoc_url=None)
    # the tuner page is served by a separate static file server, so the API
    # must answer cross-origin requests
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    started = time.time()
    n = model.queries.n
    model.eval()

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid_request", "message": str(exc.errors())}},
        )

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "checkpoint_id": checkpoint_id,
            "uptime_s": time.time() - started,
        }

    @app.get("/queries")
    def queries():
        shape = list(model.queries.queries.shape[1:])
        return {"count": n, "shape": shape, "degree_labels": list(range(1, n + 1))}

    @app.post("/rectify")
    def rectify(payload: RectifyPayload):
        t0 = time.perf_counter()
        if (payload.degree is None) == (payload.blend is None):
            raise ApiError(400, "control_conflict", "provide exactly one of degree or blend")

        image = _decode_image(payload.image, "image")
        if max(image.shape[:2]) > max_side:
            raise ApiError(
                413, "image_too_large",
                f"max side is {max_side}, got {image.shape[1]}x{image.shape[0]}",
            )

        try:
            if payload.degree is not None:
                if not 1 <= payload.degree <= n:
                    raise ApiError(400, "invalid_degree", f"degree must be in 1..{n}")
                blend = [1.0 if i == payload.degree - 1 else 0.0 for i in range(n)]
            else:
                blend = [float(v) for v in payload.blend]
            control = control_from_blend(model, blend)
        except ApiError:
            raise
        except ValidationError as exc:
            raise ApiError(400, "invalid_blend", str(exc)) from exc

        rectified = rectify_image(model, image, control)
        image_b64 = _encode_image(rectified)

        response = {
            "image": image_b64,
            "blend": blend,
            "checkpoint_id": checkpoint_id,
        }
        if payload.return_metrics:
            if payload.gt is None:
                raise ApiError(400, "missing_gt", "return_metrics needs a gt payload")
            gt = _decode_image(payload.gt, "gt")
            if gt.shape != image.shape:
                raise ApiError(400, "gt_mismatch", "gt dimensions must match the input image")
            # score the quantized bytes the client will decode, so offline
            # psnr/ssim on the returned PNG reproduce these numbers exactly
            sent = np.asarray(
                Image.open(io.BytesIO(base64.b64decode(image_b64))).convert("RGB"),
                dtype=np.float32,
            ) / 255.0
            response["psnr"] = _metric_value(psnr(sent, gt))
            response["ssim"] = _metric_value(ssim(sent, gt))
        response["latency_ms"] = (time.perf_counter() - t0) * 1000.0
        return response

    return app


def serve(ckpt_path: str, port: int = 8000, host: str = "127.0.0.1") -> None:
    import uvicorn

    from .checkpoint import load_checkpoint

    model, ckpt_id = load_checkpoint(ckpt_path)
    if model.stage != "finetuned":
        raise StateError(f"serving needs a finetuned checkpoint, got stage {model.stage!r}")
    uvicorn.run(create_app(model, ckpt_id), host=host, port=port, log_level="warning")
