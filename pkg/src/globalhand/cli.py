"""Command-line interface.

Every subcommand accepts ``--config FILE`` holding ``flag-name = value`` lines;
explicit flags override the file.  Failures exit with status 1 and a single
JSON line on stderr: ``{"error": "<ErrorType>", "message": "..."}``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import Handedness
from .dataset import read_dataset, write_dataset
from .errors import GlobalHandError
from .evaluate import EvaluationConfig, evaluate_dataset
from .heatmap import amplitude_to_depth, decode_heatmaps, encode_z_heatmaps, read_heatmaps, write_heatmaps
from .pipeline import (
    canonicalize_records,
    detect_dir,
    perturb_records,
    reconstruct_records,
    synth_records,
    track_records,
)
from .synth import NoiseModel


def _cmd_synth(args) -> None:
    records = synth_records(args.seed, args.frames, args.sequences, args.drop_rate)
    write_dataset(records, args.out)


def _cmd_canonicalize(args) -> None:
    write_dataset(canonicalize_records(read_dataset(args.input)), args.out)


def _cmd_reconstruct(args) -> None:
    records, failures = reconstruct_records(read_dataset(args.input), args.key_bone_length)
    write_dataset(records, args.out)
    if failures:
        logging.getLogger(__name__).warning("%d hand(s) could not be reconstructed", failures)


def _cmd_perturb(args) -> None:
    noise = NoiseModel(args.sigma_2d, args.sigma_can, args.seed)
    write_dataset(perturb_records(read_dataset(args.input), noise), args.out)


def _cmd_track(args) -> None:
    records = track_records(read_dataset(args.input), args.window, args.degree, args.extrapolate)
    write_dataset(records, args.out)


def _cmd_detect(args) -> None:
    write_dataset(detect_dir(args.energy_dir, args.height, args.width, args.tau_abs, args.margin), args.out)


def _cmd_evaluate(args) -> None:
    report = evaluate_dataset(read_dataset(args.gt), read_dataset(args.pred), EvaluationConfig(key_bone_length=args.key_bone_length))
    if args.report:
        report.write_json(args.report)
    else:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if args.curves_dir:
        report.write_curves(args.curves_dir)


def _cmd_heatmap_encode(args) -> None:
    side = Handedness(args.side)
    record = next((r for r in read_dataset(args.input) if r.frame == args.frame and (args.seq is None or r.seq == args.seq)), None)
    if record is None:
        raise GlobalHandError(f"frame {args.frame} not found")
    entry = record.hand(side)
    if entry.rc is None or entry.can is None:
        raise GlobalHandError(f"frame {args.frame} {side.value} hand has no 2D/canonical joints")
    maps = encode_z_heatmaps(entry.pose2d(side), entry.can[:, 2], args.res, args.sigma)
    write_heatmaps(args.out, maps)


def _cmd_heatmap_decode(args) -> None:
    decoded = decode_heatmaps(np.stack(read_heatmaps(args.input)))
    rc = decoded.pose.joints
    out = {
        "rc": [None if m else [float(v) for v in row] for row, m in zip(rc, decoded.missing)],
        "amplitude": [float(a) for a in decoded.amplitudes],
        "z_can": [None if m else float(z) for z, m in zip(amplitude_to_depth(decoded.amplitudes), decoded.missing)],
        "missing": [bool(m) for m in decoded.missing],
    }
    text = json.dumps(out) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="globalhand", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="file of 'flag-name = value' lines")
        p.set_defaults(func=func)
        return p

    p = command("synth", _cmd_synth, "generate a synthetic ground-truth dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=500, help="frames (per sequence when --sequences > 0)")
    p.add_argument("--sequences", type=int, default=0, help="0 emits independent static frames")
    p.add_argument("--drop-rate", type=float, default=0.1)
    p.add_argument("--out", required=True)

    p = command("canonicalize", _cmd_canonicalize, "add 2D and canonical joints from global joints")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = command("reconstruct", _cmd_reconstruct, "global joints from 2D + canonical joints")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key-bone-length", type=float, default=10.0)

    p = command("perturb", _cmd_perturb, "noisy 2D/canonical estimates from ground truth")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--sigma-2d", type=float, default=0.0)
    p.add_argument("--sigma-can", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = command("track", _cmd_track, "smooth root distances over each sequence")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--extrapolate", action="store_true", help="fit earlier samples only")
    p.add_argument("--out", required=True)

    p = command("detect", _cmd_detect, "hand boxes from energy maps")
    p.add_argument("--energy-dir", required=True)
    p.add_argument("--height", type=int, default=270)
    p.add_argument("--width", type=int, default=480)
    p.add_argument("--tau-abs", type=float, default=0.1)
    p.add_argument("--margin", type=float, default=0.15)
    p.add_argument("--out", required=True)

    p = command("evaluate", _cmd_evaluate, "score predictions against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--report")
    p.add_argument("--curves-dir")
    p.add_argument("--key-bone-length", type=float, default=10.0)

    hm = sub.add_parser("heatmap", help="z-heatmap encoding and decoding")
    hm_sub = hm.add_subparsers(dest="heatmap_command", required=True)
    p = hm_sub.add_parser("encode", help="encode one hand of one frame")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_heatmap_encode)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--seq", type=int)
    p.add_argument("--side", choices=[s.value for s in Handedness], default="right")
    p.add_argument("--res", type=int, default=32)
    p.add_argument("--sigma", type=float, default=1.5)
    p.add_argument("--out", required=True)
    p = hm_sub.add_parser("decode", help="decode a heatmap stack to JSON")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_heatmap_decode)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    return parser


def _subparser_for(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.ArgumentParser:
    current = parser
    for token in argv:
        sub_actions = [a for a in current._actions if isinstance(a, argparse._SubParsersAction)]
        if sub_actions and token in sub_actions[0].choices:
            current = sub_actions[0].choices[token]
    return current


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load ``--config`` values as defaults of the selected subcommand."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    path = pre.parse_known_args(argv)[0].config
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string("[cli]\n" + Path(path).read_text(encoding="utf-8"))
    target = _subparser_for(parser, argv)
    by_flag = {opt.lstrip("-"): action for action in target._actions for opt in action.option_strings}
    defaults = {}
    for key, raw in cp["cli"].items():
        action = by_flag.get(key)
        if action is None:
            raise GlobalHandError(f"unknown config key '{key}'")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = raw.strip().lower() in ("1", "true", "yes", "on")
        else:
            defaults[action.dest] = action.type(raw) if action.type else raw
        action.required = False
    target.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        args.func(args)
    except (GlobalHandError, OSError, ValueError, configparser.Error) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
