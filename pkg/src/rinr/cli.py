"""Command-line interface.

Subcommands: encode, decode, eval, stats, plan, group-sim. Exit codes:
0 success, 1 runtime or data error, 2 usage or file-parse error. All CSV
output carries a header row; numbers are printed with 6 significant digits
and infinities spelled "inf".
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from rinr.codec import (
    DEFAULT_OBJECT_TABLE,
    BoundingBox,
    ObjectMode,
    ObjectSizeTable,
    compute_residual,
    crop,
    decode,
    encode,
    entropy,
    psnr,
    psnr_outside,
)
from rinr.comm import (
    DeviceProfile,
    fog_total,
    optimize_routes,
    training_location,
    transfer_time,
)
from rinr.container import ContainerError, pack, unpack
from rinr.imgio import ImageFormatError, load_image, save_image
from rinr.mlp import MlpArchitecture, TrainConfig, parse_arch
from rinr.scheduler import (
    BatchPlan,
    DecodeJob,
    LatencyModel,
    decode_batch,
    group_by_arch,
    plan_latency,
)


class FileParseError(Exception):
    """Structured-text input that does not follow its grammar (exit 2)."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _parse_bbox(text: str) -> BoundingBox:
    parts = text.split(",")
    if len(parts) != 4:
        raise FileParseError(f"bbox must be x,y,w,h; got {text!r}")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError:
        raise FileParseError(f"bbox must be four integers; got {text!r}") from None
    return BoundingBox(x, y, w, h)


def _thread_default() -> int:
    env = os.environ.get("RINR_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError:
            raise FileParseError(f"RINR_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise FileParseError(f"RINR_THREADS must be >= 1, got {n}")
        return n
    return 1


def _data_lines(path: str):
    """Yield (line_number, stripped_text) skipping blanks and # comments."""
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if text:
                yield lineno, text


@dataclass
class JobSpec:
    """Everything cmd_encode needs, validated before any fitting starts."""

    input_path: str
    bbox: BoundingBox
    bg_arch: MlpArchitecture
    obj_arch: MlpArchitecture | None  # None = pick from the size table
    mode: ObjectMode
    out_path: str
    seed: int
    bg_steps: int
    obj_steps: int
    learning_rate: float
    report_path: str | None = None
    image: np.ndarray = field(default=None, repr=False)


def _build_job_spec(args) -> JobSpec:
    image = load_image(args.input)
    bbox = _parse_bbox(args.bbox)
    bbox.validate_for(image.shape[1], image.shape[0])
    bg_arch = parse_arch(args.bg_arch)
    obj_arch = None if args.obj_arch == "auto" else parse_arch(args.obj_arch)
    mode = ObjectMode.RESIDUAL if args.mode == "residual" else ObjectMode.DIRECT
    return JobSpec(
        input_path=args.input,
        bbox=bbox,
        bg_arch=bg_arch,
        obj_arch=obj_arch,
        mode=mode,
        out_path=args.out,
        seed=args.seed,
        bg_steps=args.bg_steps,
        obj_steps=args.obj_steps,
        learning_rate=args.learning_rate,
        report_path=args.report,
        image=image,
    )


def cmd_encode(args) -> int:
    spec = _build_job_spec(args)
    table = DEFAULT_OBJECT_TABLE
    if spec.obj_arch is not None:
        # a fixed object arch still goes through the table type for encode()
        table = ObjectSizeTable(tiers=((None, spec.obj_arch),))
    cfg_bg = TrainConfig(learning_rate=spec.learning_rate, steps=spec.bg_steps, seed=spec.seed)
    cfg_obj = TrainConfig(
        learning_rate=spec.learning_rate, steps=spec.obj_steps, seed=spec.seed + 1
    )
    encoded, (bg_report, obj_report) = encode(
        spec.image, spec.bbox, spec.bg_arch, table, cfg_bg, cfg_obj, spec.mode
    )
    blob = pack(encoded)
    with open(spec.out_path, "wb") as f:
        f.write(blob)

    recon = decode(encoded)
    object_psnr = psnr(spec.image, recon, region=spec.bbox)
    background_psnr = psnr_outside(spec.image, recon, spec.bbox)

    report_path = spec.report_path or spec.out_path + ".fit.csv"
    with open(report_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["phase", "arch", "steps_run", "final_loss", "final_psnr_db", "wall_time_s"])
        for phase, arch, report in (
            ("background", encoded.bg_arch, bg_report),
            ("object", encoded.obj_arch, obj_report),
        ):
            writer.writerow(
                [
                    phase,
                    str(arch),
                    report.steps_run,
                    _fmt(report.loss_trace[-1] if report.loss_trace else math.inf),
                    _fmt(report.final_psnr_db),
                    _fmt(report.wall_time_s),
                ]
            )
    print(
        f"wrote {spec.out_path} ({len(blob)} bytes) "
        f"bg_arch={encoded.bg_arch} obj_arch={encoded.obj_arch} mode={spec.mode.name.lower()} "
        f"object_psnr={_fmt(object_psnr)} background_psnr={_fmt(background_psnr)}"
    )
    return 0


def _read_container(path: str):
    with open(path, "rb") as f:
        data = f.read()
    return unpack(data)


def cmd_decode(args) -> int:
    threads = args.threads if args.threads is not None else _thread_default()
    if args.batch is not None:
        return _decode_batch_mode(args, threads)
    if args.input is None or args.out is None:
        raise FileParseError("decode needs --input and --out (or --batch for manifest mode)")
    encoded = _read_container(args.input)
    image = decode(encoded)
    save_image(args.out, image)
    print(f"wrote {args.out} ({encoded.width}x{encoded.height})")
    return 0


def _decode_batch_mode(args, threads: int) -> int:
    entries: list[tuple[str, str]] = []
    for lineno, text in _data_lines(args.batch):
        parts = text.split()
        if len(parts) != 2:
            raise FileParseError(
                f"{args.batch}:{lineno}: expected '<container> <output>', got {text!r}"
            )
        entries.append((parts[0], parts[1]))
    jobs = []
    outputs = {}
    for i, (src, dst) in enumerate(entries):
        encoded = _read_container(src)
        job_id = f"{i}:{src}"
        jobs.append(DecodeJob.from_encoded(job_id, encoded))
        outputs[job_id] = dst
    plan = group_by_arch(jobs, args.batch_size, seed=args.seed)
    model = LatencyModel()
    latency = plan_latency(plan, jobs, model) if jobs else 0.0
    images = decode_batch(jobs, thread_budget=threads)
    for job, image in zip(jobs, images):
        save_image(outputs[job.image_id], image)
    print(
        f"decoded {len(jobs)} images in {len(plan.batches)} batches "
        f"(batch_size={args.batch_size}, threads={threads}) plan_latency={_fmt(latency)}"
    )
    return 0


def cmd_eval(args) -> int:
    raw = load_image(args.raw)
    decoded = load_image(args.decoded)
    if raw.shape != decoded.shape:
        raise ValueError(f"image shapes differ: {raw.shape} vs {decoded.shape}")
    bbox = _parse_bbox(args.bbox)
    bbox.validate_for(raw.shape[1], raw.shape[0])
    writer = csv.writer(sys.stdout)
    writer.writerow(["full_psnr_db", "object_psnr_db", "background_psnr_db"])
    writer.writerow(
        [
            _fmt(psnr(raw, decoded)),
            _fmt(psnr(raw, decoded, region=bbox)),
            _fmt(psnr_outside(raw, decoded, bbox)),
        ]
    )
    return 0


def cmd_stats(args) -> int:
    raw = load_image(args.raw)
    background = load_image(args.background)
    if raw.shape != background.shape:
        raise ValueError(f"image shapes differ: {raw.shape} vs {background.shape}")
    bbox = _parse_bbox(args.bbox)
    bbox.validate_for(raw.shape[1], raw.shape[0])
    raw_patch = crop(raw, bbox)
    stored = compute_residual(raw_patch, crop(background, bbox)).stored
    writer = csv.writer(sys.stdout)
    writer.writerow(["raw_entropy_bits", "residual_entropy_bits", "bins"])
    writer.writerow(
        [
            _fmt(entropy(raw_patch, args.bins)),
            _fmt(entropy(stored, args.bins)),
            args.bins,
        ]
    )
    return 0


def _load_devices(path: str) -> list[DeviceProfile]:
    devices = []
    for lineno, text in _data_lines(path):
        parts = text.split()
        if len(parts) != 3:
            raise FileParseError(
                f"{path}:{lineno}: expected '<id> <payload_bytes> <receiver_count>', got {text!r}"
            )
        try:
            payload = int(parts[1])
            receivers = int(parts[2])
        except ValueError:
            raise FileParseError(f"{path}:{lineno}: byte and receiver counts must be integers") from None
        try:
            devices.append(DeviceProfile(parts[0], payload, receivers))
        except ValueError as e:
            raise FileParseError(f"{path}:{lineno}: {e}") from None
    return devices


def cmd_plan(args) -> int:
    devices = _load_devices(args.devices)
    try:
        plan = optimize_routes(devices, args.alpha, bandwidth_bytes_per_s=args.bandwidth)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise FileParseError(f"bad --alpha {args.alpha!r}: {e}") from None
    report = fog_total(devices, plan)
    verdict = ""
    if args.model_bytes is not None and args.data_bytes is not None:
        verdict = training_location(args.data_bytes, args.model_bytes).value
    writer = csv.writer(sys.stdout)
    writer.writerow(
        [
            "record",
            "id",
            "route",
            "marginal_saving",
            "d_s",
            "d_f",
            "m1",
            "m2",
            "m3",
            "savings",
            "ratio",
            "serverless_transfer_s",
            "fog_transfer_s",
            "training_site",
        ]
    )
    for row in report.per_device:
        writer.writerow(
            ["device", row.id, row.route.value, row.marginal_saving] + [""] * 10
        )
    writer.writerow(
        [
            "summary",
            "",
            "",
            "",
            report.d_s,
            report.d_f,
            report.m1,
            report.m2,
            report.m3,
            report.savings,
            _fmt(report.ratio),
            _fmt(transfer_time(report.d_s, plan)),
            _fmt(transfer_time(report.d_f, plan)),
            verdict,
        ]
    )
    return 0


def _load_sim_jobs(path: str) -> list[DecodeJob]:
    jobs = []
    for lineno, text in _data_lines(path):
        parts = text.split()
        if len(parts) != 2:
            raise FileParseError(
                f"{path}:{lineno}: expected '<id> <arch-pair-or-cost>', got {text!r}"
            )
        job_id, token = parts
        if "x" in token:
            halves = token.split("+")
            if len(halves) != 2:
                raise FileParseError(
                    f"{path}:{lineno}: arch pair must be 'LxH+LxH', got {token!r}"
                )
            try:
                cost = float(sum(parse_arch(h).parameter_count for h in halves))
            except ValueError as e:
                raise FileParseError(f"{path}:{lineno}: {e}") from None
        else:
            try:
                cost = float(token)
            except ValueError:
                raise FileParseError(
                    f"{path}:{lineno}: cost must be numeric or an arch pair, got {token!r}"
                ) from None
            if cost <= 0:
                raise FileParseError(f"{path}:{lineno}: cost must be > 0")
        jobs.append(DecodeJob(image_id=job_id, arch_key=token, cost=cost))
    return jobs


def _ungrouped_latencies(jobs: list[DecodeJob], batch_size: int, model, seed: int):
    """Latency of every order-chunked plan; exhaustive up to 8 jobs, sampled above."""
    ids = list(range(len(jobs)))

    def chunked(order):
        batches = [
            tuple(jobs[i].image_id for i in order[s : s + batch_size])
            for s in range(0, len(order), batch_size)
        ]
        return plan_latency(BatchPlan(tuple(batches), batch_size), jobs, model)

    if len(jobs) <= 8:
        return [chunked(p) for p in itertools.permutations(ids)]
    rng = np.random.default_rng(seed)
    return [chunked(list(rng.permutation(len(jobs)))) for _ in range(1000)]


def cmd_group_sim(args) -> int:
    jobs = _load_sim_jobs(args.manifest)
    if not jobs:
        raise FileParseError(f"{args.manifest}: no jobs")
    model = LatencyModel()
    plan = group_by_arch(jobs, args.batch_size, seed=args.seed)
    grouped = plan_latency(plan, jobs, model)
    ungrouped = _ungrouped_latencies(jobs, args.batch_size, model, args.seed)
    writer = csv.writer(sys.stdout)
    writer.writerow(
        ["job_count", "batch_size", "grouped", "ungrouped_worst", "ungrouped_mean"]
    )
    writer.writerow(
        [
            len(jobs),
            args.batch_size,
            _fmt(grouped),
            _fmt(max(ungrouped)),
            _fmt(float(np.mean(ungrouped))),
        ]
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rinr",
        description="Two-network image codec with batched decoding and a fleet communication planner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="fit networks to an image and write a container")
    p.add_argument("--input", required=True, help="source image (.ppm or .png)")
    p.add_argument("--bbox", required=True, help="object box as x,y,w,h")
    p.add_argument("--bg-arch", default="10x30", help="background net, LxH (default 10x30)")
    p.add_argument(
        "--obj-arch", default="auto", help="object net LxH, or 'auto' to size by box area"
    )
    p.add_argument("--mode", choices=("residual", "direct"), default="residual")
    p.add_argument("--seed", type=int, default=0, help="background seed; object uses seed+1")
    p.add_argument("--bg-steps", type=int, default=2000)
    p.add_argument("--obj-steps", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="container file to write")
    p.add_argument("--report", default=None, help="fit-report CSV path (default <out>.fit.csv)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct image(s) from container file(s)")
    p.add_argument("--input", help="container file (single mode)")
    p.add_argument("--out", help="output image path (single mode)")
    p.add_argument("--batch", help="manifest of '<container> <output>' lines")
    p.add_argument("--batch-size", type=int, default=4, help="jobs per batch in batch mode")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default RINR_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0, help="plan shuffle seed in batch mode")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="PSNR of a decoded image against the original")
    p.add_argument("raw", help="original image")
    p.add_argument("decoded", help="reconstructed image")
    p.add_argument("--bbox", required=True, help="object box as x,y,w,h")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="entropy of raw object values vs stored residuals")
    p.add_argument("raw", help="original image")
    p.add_argument("background", help="background-only reconstruction")
    p.add_argument("--bbox", required=True, help="object box as x,y,w,h")
    p.add_argument("--bins", type=int, default=256)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plan", help="fleet communication report for a device file")
    p.add_argument("devices", help="lines of '<id> <payload_bytes> <receiver_count>'")
    p.add_argument("--alpha", required=True, help="compression factor in (0, 1], e.g. 0.083")
    p.add_argument("--model-bytes", type=int, default=None)
    p.add_argument("--data-bytes", type=int, default=None)
    p.add_argument("--bandwidth", type=float, default=2_000_000.0, help="bytes per second")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("group-sim", help="grouped vs ungrouped batch latency for a job manifest")
    p.add_argument("manifest", help="lines of '<id> <LxH+LxH or cost>'")
    p.add_argument("--batch-size", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_group_sim)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ContainerError, ImageFormatError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
