"""Paired fisheye/ground-truth dataset generation and manifest IO.

Layout under the output directory:

    {pretrain,finetune,test}/{fisheye,gt}/NNNNNN_dI.png
    manifest.txt   tab-separated: fisheye_path, gt_path, degree_label, split
    params.txt     one line per degree: "i k1 k2 k3 k4"
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .images import load_image, resize_image, save_image
from .radial import DEFAULT_BASE_PARAMS, DistortionParams, build_degree_ladder
from .synth import corner_radius, synthesize_fisheye

SPLITS = ("pretrain", "finetune", "test")


class DatasetError(DataError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    fisheye_path: str
    gt_path: str
    degree_label: int
    split: str


@dataclass
class DatasetManifest:
    root: Path
    records: list[DatasetRecord]
    params_table: dict[int, DistortionParams]
    seed: int
    size: int

    def split_records(self, split: str) -> list[DatasetRecord]:
        if split not in SPLITS:
            raise DatasetError(f"unknown split {split!r}")
        return [r for r in self.records if r.split == split]

    def degrees_in_split(self, split: str) -> list[int]:
        return sorted({r.degree_label for r in self.split_records(split)})


@dataclass(frozen=True)
class SplitCounts:
    pretrain: int
    finetune: int
    test: int

    @property
    def total(self) -> int:
        return self.pretrain + self.finetune + self.test


def build_dataset(
    src_dir: str | Path,
    out_dir: str | Path,
    counts: SplitCounts,
    seed: int = 0,
    size: int = 256,
    base: DistortionParams = DEFAULT_BASE_PARAMS,
    degrees: list[int] | None = None,
) -> DatasetManifest:
    """Synthesize paired images for all three splits.

    Sources are shuffled deterministically by `seed` and consumed in order.
    The pretrain split uses only the base degree; finetune/test cycle through
    `degrees` (default 1..9) round-robin. Undecodable sources are skipped with
    a warning; the build fails if the quota cannot be met.
    """
    src_dir = Path(src_dir)
    out_root = Path(out_dir)
    degrees = list(degrees) if degrees is not None else list(range(1, 10))
    if not degrees or any(d not in range(1, 10) for d in degrees):
        raise DatasetError(f"degrees must be a non-empty subset of 1..9, got {degrees}")

    sources = sorted(p for p in src_dir.iterdir() if p.is_file())
    if len(sources) < counts.total:
        raise DatasetError(
            f"need {counts.total} source images, found only {len(sources)} in {src_dir}"
        )
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(sources)))

    ladder = {
        i: p.with_norm_radius(corner_radius(size))
        for i, p in build_degree_ladder(base).items()
    }
    base_degree = base.degree_label

    plan: list[tuple[str, int]] = []
    plan += [("pretrain", base_degree)] * counts.pretrain
    plan += [("finetune", degrees[j % len(degrees)]) for j in range(counts.finetune)]
    plan += [("test", degrees[j % len(degrees)]) for j in range(counts.test)]

    for split in SPLITS:
        (out_root / split / "fisheye").mkdir(parents=True, exist_ok=True)
        (out_root / split / "gt").mkdir(parents=True, exist_ok=True)

    records: list[DatasetRecord] = []
    counters = {s: 0 for s in SPLITS}
    cursor = 0
    for split, degree in plan:
        gt = None
        while gt is None:
            if cursor >= len(order):
                raise DatasetError("ran out of decodable source images before meeting quota")
            candidate = sources[order[cursor]]
            cursor += 1
            try:
                gt = resize_image(load_image(candidate), size)
            except Exception as exc:  # undecodable source
                warnings.warn(f"skipping undecodable source {candidate}: {exc}")
                gt = None
        # quantize first so the stored pair differs from synth(gt.png) only
        # by the fisheye image's own rounding step
        gt = np.rint(gt * 255.0).astype(np.float32) / 255.0
        fisheye = synthesize_fisheye(gt, ladder[degree])
        idx = counters[split]
        counters[split] += 1
        rel_fe = f"{split}/fisheye/{idx:06d}_d{degree}.png"
        rel_gt = f"{split}/gt/{idx:06d}_d{degree}.png"
        save_image(out_root / rel_fe, fisheye)
        save_image(out_root / rel_gt, gt)
        records.append(DatasetRecord(rel_fe, rel_gt, degree, split))

    manifest = DatasetManifest(out_root, records, ladder, seed, size)
    write_manifest(manifest)
    return manifest


def write_manifest(manifest: DatasetManifest) -> None:
    lines = [f"# seed={manifest.seed}\tsize={manifest.size}"]
    lines += [
        f"{r.fisheye_path}\t{r.gt_path}\t{r.degree_label}\t{r.split}"
        for r in manifest.records
    ]
    (manifest.root / "manifest.txt").write_text("\n".join(lines) + "\n")

    plines = [
        f"{i} {p.k[0]!r} {p.k[1]!r} {p.k[2]!r} {p.k[3]!r}"
        for i, p in sorted(manifest.params_table.items())
    ]
    (manifest.root / "params.txt").write_text("\n".join(plines) + "\n")


def load_manifest(root: str | Path) -> DatasetManifest:
    root = Path(root)
    seed, size = 0, 256
    records: list[DatasetRecord] = []
    for line in (root / "manifest.txt").read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, value = part.partition("=")
                if key == "seed":
                    seed = int(value)
                elif key == "size":
                    size = int(value)
            continue
        fe, gt, degree, split = line.split("\t")
        if split not in SPLITS:
            raise DatasetError(f"unknown split {split!r} in manifest")
        records.append(DatasetRecord(fe, gt, int(degree), split))

    params_table: dict[int, DistortionParams] = {}
    for line in (root / "params.txt").read_text().splitlines():
        if not line.strip():
            continue
        fields = line.split()
        degree = int(fields[0])
        k = tuple(float(v) for v in fields[1:5])
        params_table[degree] = DistortionParams(
            k=k, degree_label=degree, norm_radius=corner_radius(size)
        )
    return DatasetManifest(root, records, params_table, seed, size)


def validate_manifest(manifest: DatasetManifest) -> None:
    """Check the manifest invariants: files exist, decode, and sizes agree."""
    for r in manifest.records:
        if r.degree_label not in manifest.params_table:
            raise DatasetError(f"degree {r.degree_label} missing from params table")
        fe = load_image(manifest.root / r.fisheye_path)
        gt = load_image(manifest.root / r.gt_path)
        if fe.shape != gt.shape:
            raise DatasetError(f"size mismatch for record {r}")
