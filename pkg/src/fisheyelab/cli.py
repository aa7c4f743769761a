"""Command-line entry points for the whole pipeline.

Exit codes: 0 success, 2 validation/usage errors, 1 runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ValidationError


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output path (meaning depends on the subcommand)")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fisheyelab", description=__doc__)
    common = _common_flags()
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", parents=[common], help="build a paired dataset")
    sp.add_argument("--src", required=True, help="directory of source images")
    sp.add_argument("--counts", required=True, help="pretrain,finetune,test record counts")
    sp.add_argument("--size", type=int, default=256)
    sp.add_argument("--degrees", default=None, help="comma list, default 1..9")

    sp = sub.add_parser("pretrain", parents=[common], help="stage-1 training on one degree")
    sp.add_argument("--data", required=True, help="dataset root")
    sp.add_argument("--steps", type=int, default=None)

    sp = sub.add_parser("finetune", parents=[common], help="stage-2 training on all degrees")
    sp.add_argument("--data", required=True)
    sp.add_argument("--ckpt", required=True, help="pretrained checkpoint")
    sp.add_argument("--steps", type=int, default=None)

    sp = sub.add_parser("eval", parents=[common], help="per-degree PSNR/SSIM report")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--policy", default="matched", choices=("matched", "swapped", "none"))
    sp.add_argument("--split", default="test")

    sp = sub.add_parser("rectify", parents=[common], help="rectify one image")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--image", required=True)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--blend", default=None, help="comma list of 9 convex weights")

    sp = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--host", default="127.0.0.1")

    sp = sub.add_parser("export-queries", parents=[common], help="dump query slots as .npy")
    sp.add_argument("--ckpt", required=True)

    return p


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    from .config import parse_config_file

    return parse_config_file(args.config) if args.config else {}


def _require_out(args: argparse.Namespace) -> Path:
    if not args.out:
        raise ValidationError(f"{args.command} needs --out")
    return Path(args.out)


def _cmd_synth(args: argparse.Namespace) -> int:
    from .dataset import SplitCounts, build_dataset

    parts = [int(v) for v in args.counts.split(",")]
    if len(parts) != 3:
        raise ValidationError(f"--counts wants pretrain,finetune,test; got {args.counts!r}")
    degrees = [int(v) for v in args.degrees.split(",")] if args.degrees else None
    out = _require_out(args)
    manifest = build_dataset(
        args.src, out, SplitCounts(*parts),
        seed=args.seed if args.seed is not None else 0,
        size=args.size, degrees=degrees,
    )
    print(f"wrote {len(manifest.records)} records to {out / 'manifest.txt'}")
    return 0


def _cmd_pretrain(args: argparse.Namespace) -> int:
    from .config import model_config_from, train_config_from
    from .dataset import load_manifest
    from .model import RectifierNet
    from .train import pretrain, write_train_report

    overrides = _overrides(args)
    if args.steps is not None:
        overrides["steps"] = str(args.steps)
    model_cfg = model_config_from(overrides)
    train_cfg = train_config_from(overrides, seed=args.seed)
    out = _require_out(args)
    out.mkdir(parents=True, exist_ok=True)

    import torch

    torch.manual_seed(train_cfg.seed)
    model = RectifierNet(model_cfg)
    report = pretrain(model, load_manifest(args.data), train_cfg, out / "pretrained.ckpt")
    write_train_report(report, out / "pretrain_report.txt")
    print(f"pretrained {report.checkpoint_path} "
          f"(final loss {report.records[-1].total:.4f}, {report.wall_clock:.1f}s)")
    return 0


def _cmd_finetune(args: argparse.Namespace) -> int:
    from .checkpoint import load_checkpoint
    from .config import train_config_from
    from .dataset import load_manifest
    from .train import finetune, write_train_report

    overrides = _overrides(args)
    if args.steps is not None:
        overrides["steps"] = str(args.steps)
    train_cfg = train_config_from(overrides, seed=args.seed)
    out = _require_out(args)
    out.mkdir(parents=True, exist_ok=True)

    model, _ = load_checkpoint(args.ckpt)
    report = finetune(model, load_manifest(args.data), train_cfg, out / "finetuned.ckpt")
    write_train_report(report, out / "finetune_report.txt")
    print(f"finetuned {report.checkpoint_path} "
          f"(final loss {report.records[-1].total:.4f}, {report.wall_clock:.1f}s)")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .checkpoint import load_checkpoint
    from .dataset import load_manifest
    from .evaluate import evaluate, format_table, write_report_lines

    model, ckpt_id = load_checkpoint(args.ckpt)
    report = evaluate(
        model, load_manifest(args.data), policy=args.policy,
        split=args.split, checkpoint_id=ckpt_id,
    )
    print(format_table(report))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_report_lines(report, out / "eval_lines.txt")
    return 0


def _cmd_rectify(args: argparse.Namespace) -> int:
    from .checkpoint import load_checkpoint
    from .images import load_image, save_image
    from .infer import control_for_degree, control_from_blend, rectify_image

    if (args.degree is None) == (args.blend is None):
        raise ValidationError("provide exactly one of --degree or --blend")
    model, _ = load_checkpoint(args.ckpt)
    if args.degree is not None:
        control = control_for_degree(model, args.degree)
    else:
        control = control_from_blend(model, [float(v) for v in args.blend.split(",")])
    out = _require_out(args)
    save_image(out, rectify_image(model, load_image(args.image), control))
    print(f"wrote {out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(args.ckpt, port=args.port, host=args.host)
    return 0


def _cmd_export_queries(args: argparse.Namespace) -> int:
    from .checkpoint import export_queries

    paths = export_queries(args.ckpt, _require_out(args))
    print(f"wrote {len(paths)} query arrays to {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "pretrain": _cmd_pretrain,
    "finetune": _cmd_finetune,
    "eval": _cmd_eval,
    "rectify": _cmd_rectify,
    "serve": _cmd_serve,
    "export-queries": _cmd_export_queries,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map any failure to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
