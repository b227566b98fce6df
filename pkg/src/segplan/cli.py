"""Command-line entry point wiring the planning workflow end to end.

Subcommands: fingerprint, plan, preprocess, augment-preview, tile, ensemble,
evaluate, select, postprocess-decide, rank, splits, run.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 planner
non-convergence. SEGPLAN_SEED serves as the seed fallback.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .augment import (
    PatchGeometry,
    RngStream,
    intensity_transform,
    mirror,
    required_input_extent,
    sample_params,
    sample_patch_origins,
    spatial_transform,
)
from .errors import (
    BudgetTooSmall,
    EmptyInput,
    IoFailure,
    NoConvergence,
    SegplanError,
    TooFewGroups,
    TruncatedFile,
)
from .evalselect import (
    PostprocessingDecision,
    bootstrap_ranking,
    decide_postprocessing,
    evaluate_cases,
    select_configuration,
)
from .fingerprint import aggregate_dataset_fingerprint, extract_case_fingerprint
from .geometry import LabelVolume
from .planner import (
    ALL_KINDS,
    REFERENCE_BUDGET_2D,
    REFERENCE_BUDGET_3D,
    assemble_pipeline_fingerprint,
)
from .preprocess import preprocess_case
from .storage import (
    case_group,
    find_case_manifests,
    read_case,
    read_fingerprint,
    read_plan,
    read_probabilities,
    read_volume,
    write_fingerprint,
    write_plan,
    write_probabilities,
    write_volume,
)
from .tiling import ProbabilityVolume, compute_tile_origins, ensemble_average

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NONCONVERGENCE = 4


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get("SEGPLAN_SEED", "0"))


def _dump(doc: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# cross-validation splits
# ---------------------------------------------------------------------------

def make_cv_splits(
    case_ids: list[str],
    folds: int,
    group_map: dict | None = None,
    seed: int = 0,
) -> list[list[str]]:
    """Deal shuffled groups round-robin onto folds.

    All members of a group land in one fold; fold sizes differ by at most one
    group. Cases without a group entry form singleton groups.
    """
    if folds < 2:
        raise TooFewGroups(f"need >= 2 folds, got {folds}")
    group_map = group_map or {}
    groups: dict[str, list[str]] = {}
    for cid in sorted(case_ids):
        groups.setdefault(str(group_map.get(cid, cid)), []).append(cid)
    keys = sorted(groups)
    if len(keys) < folds:
        raise TooFewGroups(f"{len(keys)} groups for {folds} folds")
    rng = np.random.default_rng(seed)
    order = [keys[i] for i in rng.permutation(len(keys))]
    assignment: list[list[str]] = [[] for _ in range(folds)]
    for i, key in enumerate(order):
        assignment[i % folds].extend(groups[key])
    return [sorted(fold) for fold in assignment]


def validate_explicit_splits(splits: list[list[str]], case_ids: list[str]) -> None:
    seen: set[str] = set()
    for fold in splits:
        for cid in fold:
            if cid in seen:
                raise SegplanError(f"case {cid!r} appears in more than one fold")
            seen.add(cid)
    missing = set(case_ids) - seen
    if missing:
        raise SegplanError(f"split file misses cases: {sorted(missing)}")


# ---------------------------------------------------------------------------
# pipeline orchestration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    dataset_dir: Path
    output_dir: Path
    budget_3d: float = REFERENCE_BUDGET_3D
    budget_2d: float = REFERENCE_BUDGET_2D
    seed: int = 0
    configs: tuple[str, ...] | None = None
    folds: int = 5
    split_file: Path | None = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)


def _dataset_digest(manifests: list[Path], cfg: RunConfig) -> str:
    h = hashlib.sha256()
    for manifest in manifests:
        h.update(manifest.name.encode())
        h.update(manifest.read_bytes())
        doc = json.loads(manifest.read_text())
        files = [entry["path"] for entry in doc.get("channels", [])]
        if doc.get("label"):
            files.append(doc["label"])
        for rel in files:
            path = manifest.parent / rel
            stem = path
            for candidate in (path, stem.with_name(stem.name + ".raw"),
                              stem.with_name(stem.name + ".meta.json")):
                if candidate.exists() and candidate.is_file():
                    h.update(candidate.name.encode())
                    h.update(candidate.read_bytes())
    h.update(
        json.dumps(
            {
                "budget_3d": cfg.budget_3d,
                "budget_2d": cfg.budget_2d,
                "seed": cfg.seed,
                "configs": list(cfg.configs) if cfg.configs else None,
                "folds": cfg.folds,
                "version": __version__,
            },
            sort_keys=True,
        ).encode()
    )
    return h.hexdigest()


def run_pipeline(cfg: RunConfig) -> int:
    """fingerprint -> plan -> splits -> preprocess, with content-hash idempotence."""
    manifests = find_case_manifests(cfg.dataset_dir)
    if not manifests:
        raise EmptyInput(f"no cases found in {cfg.dataset_dir}")

    digest = _dataset_digest(manifests, cfg)
    manifest_path = cfg.output_dir / "run_manifest.json"
    if manifest_path.exists():
        previous = json.loads(manifest_path.read_text())
        if previous.get("input_digest") == digest:
            print(f"{cfg.output_dir}: up to date (digest {digest[:12]})")
            return EXIT_OK

    cases = [read_case(m) for m in manifests]
    case_fps = [extract_case_fingerprint(c, seed=cfg.seed) for c in cases]
    fp = aggregate_dataset_fingerprint(case_fps)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_fingerprint(fp, cfg.output_dir / "fingerprint.json")

    pipeline = assemble_pipeline_fingerprint(
        fp,
        budget_3d=cfg.budget_3d,
        budget_2d=cfg.budget_2d,
        configs=cfg.configs,
        tool_version=__version__,
    )
    write_plan(pipeline, cfg.output_dir / "plan.json")

    if cfg.split_file is not None:
        splits = json.loads(Path(cfg.split_file).read_text())["folds"]
        validate_explicit_splits(splits, [c.id for c in cases])
    else:
        groups = {m.stem.replace(".case", ""): case_group(m) for m in manifests}
        groups = {cid: g for cid, g in groups.items() if g}
        splits = make_cv_splits([c.id for c in cases], cfg.folds, groups, cfg.seed)
    _dump({"schema_version": 1, "folds": splits}, cfg.output_dir / "splits.json")

    for plan in pipeline.plans:
        config_dir = cfg.output_dir / "preprocessed" / plan.kind

        def process(case):
            pre = preprocess_case(case, plan)
            for i, ch in enumerate(pre.channels):
                write_volume(ch, config_dir / f"{case.id}_ch{i}")
            if pre.label is not None:
                write_volume(pre.label, config_dir / f"{case.id}_label")
            _dump(
                {
                    "schema_version": 1,
                    "case": case.id,
                    "config": plan.kind,
                    "shape": list(pre.shape),
                    "spacing": [s for s in pre.spacing],
                },
                config_dir / f"{case.id}.provenance.json",
            )

        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                list(pool.map(process, cases))
        else:
            for case in cases:
                process(case)

    _dump(
        {
            "schema_version": 1,
            "input_digest": digest,
            "tool_version": __version__,
            "seed": cfg.seed,
            "budgets": {"3d": cfg.budget_3d, "2d": cfg.budget_2d},
            "configs": [p.kind for p in pipeline.plans],
            "n_cases": len(cases),
        },
        manifest_path,
    )
    print(f"{cfg.output_dir}: wrote fingerprint, plan, splits and "
          f"{len(pipeline.plans)} preprocessed configuration(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_fingerprint(args) -> int:
    manifests = find_case_manifests(args.dataset_dir)
    if not manifests:
        raise EmptyInput(f"no cases found in {args.dataset_dir}")
    seed = _default_seed(args.seed)
    fps = [extract_case_fingerprint(read_case(m), seed=seed) for m in manifests]
    fp = aggregate_dataset_fingerprint(fps)
    write_fingerprint(fp, Path(args.output))
    print(f"fingerprint of {fp.n_cases} cases -> {args.output}")
    return EXIT_OK


def _parse_configs(text: str | None) -> tuple[str, ...] | None:
    if not text:
        return None
    kinds = tuple(k.strip() for k in text.split(",") if k.strip())
    for k in kinds:
        if k not in ALL_KINDS:
            raise SegplanError(f"unknown configuration {k!r}; choose from {ALL_KINDS}")
    return kinds


def _cmd_plan(args) -> int:
    fp = read_fingerprint(args.fingerprint)
    pipeline = assemble_pipeline_fingerprint(
        fp,
        budget_3d=args.budget_3d,
        budget_2d=args.budget_2d,
        configs=_parse_configs(args.configs),
        tool_version=__version__,
    )
    write_plan(pipeline, Path(args.output))
    kinds = ", ".join(pipeline.kinds)
    print(f"plan with configurations [{kinds}] -> {args.output}")
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    pipeline = read_plan(args.plan)
    manifests = find_case_manifests(args.dataset_dir)
    if not manifests:
        raise EmptyInput(f"no cases found in {args.dataset_dir}")
    out = Path(args.output)
    for plan in pipeline.plans:
        config_dir = out / plan.kind
        for manifest in manifests:
            case = read_case(manifest)
            pre = preprocess_case(case, plan)
            for i, ch in enumerate(pre.channels):
                write_volume(ch, config_dir / f"{case.id}_ch{i}")
            if pre.label is not None:
                write_volume(pre.label, config_dir / f"{case.id}_label")
            _dump(
                {
                    "schema_version": 1,
                    "case": case.id,
                    "config": plan.kind,
                    "shape": list(pre.shape),
                    "spacing": [s for s in pre.spacing],
                },
                config_dir / f"{case.id}.provenance.json",
            )
    print(f"preprocessed {len(manifests)} case(s) x {len(pipeline.plans)} "
          f"configuration(s) -> {out}")
    return EXIT_OK


def _cmd_augment_preview(args) -> int:
    from .report import render_patch_preview

    pipeline = read_plan(args.plan)
    plan = pipeline.plan(args.config)
    case = read_case(args.case)
    pre = preprocess_case(case, plan)
    if pre.label is None:
        raise EmptyInput(f"case {case.id!r} has no label to sample foreground from")

    seed = _default_seed(args.seed)
    rng = RngStream(seed)
    dim = len(plan.patch_size)
    geom = PatchGeometry(tuple(plan.patch_size), dim)
    data = np.stack([ch.data for ch in pre.channels])
    if dim == 2:
        mid = data.shape[1] // 2
        data = data[:, mid]
        label = pre.label.with_data(pre.label.data[mid : mid + 1])
        sampling_shape = (1,) + tuple(plan.patch_size)
    else:
        label = pre.label
        sampling_shape = tuple(plan.patch_size)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    sampling = sample_patch_origins(
        label, sampling_shape if dim == 3 else (1,) + tuple(plan.patch_size),
        args.count, rng,
    )
    for i, (origin, forced) in enumerate(sampling.origins):
        spatial_origin = origin if dim == 3 else origin[1:]
        params = sample_params(rng, geom, n_channels=data.shape[0])
        # oversize the crop to cover the sampled rotation/scale support
        needed = required_input_extent(plan.patch_size, params, geom)
        extent = tuple(max(n + 2, p) for n, p in zip(needed, plan.patch_size))
        centered = tuple(
            o + p // 2 - e // 2 for o, p, e in zip(spatial_origin, plan.patch_size, extent)
        )
        crop = _padded_crop(data, centered, extent)
        patch = spatial_transform(crop, params, geom, plan.patch_size)
        patch = intensity_transform(patch, params, rng, geom)
        patch = mirror(patch, params.mirror_axes, spatial_dims=dim)
        tag = f"fg{forced}" if forced is not None else "random"
        np.save(out / f"patch_{i:02d}_{tag}.npy", patch.astype(np.float32))
        render_patch_preview(
            patch, out / f"patch_{i:02d}_{tag}.png",
            title=f"{case.id} {plan.kind} sample {i} ({tag})",
        )
    print(f"wrote {len(sampling.origins)} augmented patch previews -> {out}")
    return EXIT_OK


def _padded_crop(data: np.ndarray, origin, patch) -> np.ndarray:
    """Crop (channels, *spatial) with zero padding outside the volume."""
    spatial = data.shape[1:]
    out = np.zeros((data.shape[0],) + tuple(patch), dtype=data.dtype)
    src, dst = [], []
    for o, p, n in zip(origin, patch, spatial):
        lo, hi = max(0, o), min(n, o + p)
        src.append(slice(lo, hi))
        dst.append(slice(lo - o, hi - o))
    out[(slice(None),) + tuple(dst)] = data[(slice(None),) + tuple(src)]
    return out


def _cmd_tile(args) -> int:
    shape = tuple(int(v) for v in args.shape.split(","))
    patch = tuple(int(v) for v in args.patch.split(","))
    plan = compute_tile_origins(shape, patch)
    doc = {
        "volume_shape": list(plan.volume_shape),
        "patch_size": list(plan.patch_size),
        "n_windows": len(plan.origins),
        "origins": [list(o) for o in plan.origins],
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cmd_ensemble(args) -> int:
    volumes = []
    for path in args.inputs:
        probs, spacing = read_probabilities(path)
        volumes.append(ProbabilityVolume(probs, spacing))
    merged = ensemble_average(volumes)
    write_probabilities(merged.probabilities, merged.spacing, Path(args.output))
    print(f"ensembled {len(volumes)} probability volume(s) -> {args.output}")
    return EXIT_OK


def _collect_label_pairs(pred_dir: Path, ref_dir: Path):
    pairs = []
    for sidecar in sorted(pred_dir.glob("*.meta.json")):
        stem = sidecar.name[: -len(".meta.json")]
        ref = ref_dir / sidecar.name
        if not ref.exists():
            continue
        pred_vol = read_volume(sidecar)
        ref_vol = read_volume(ref)
        if not isinstance(pred_vol, LabelVolume) or not isinstance(ref_vol, LabelVolume):
            continue
        pairs.append((stem, pred_vol, ref_vol))
    if not pairs:
        raise EmptyInput(f"no matching label volumes under {pred_dir} and {ref_dir}")
    return pairs


def _cmd_evaluate(args) -> int:
    from .report import render_evaluation

    pairs = _collect_label_pairs(Path(args.pred_dir), Path(args.ref_dir))
    n_classes = args.classes or max(p.num_classes for _, p, _ in pairs)
    result = evaluate_cases(pairs, n_classes)
    out = Path(args.output)
    doc = {"schema_version": 1, "config": args.name, **result.to_dict()}
    _dump(doc, out)
    csv_path = out.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case"] + [f"class_{c}" for c in range(1, n_classes + 1)])
        for cid in sorted(result.per_case):
            row = [cid] + [result.per_case[cid].get(c, "") for c in range(1, n_classes + 1)]
            writer.writerow(row)
    render_evaluation(result, out.with_suffix(".png"), title=args.name or "")
    print(f"mean foreground Dice {result.mean_foreground_dice:.4f} -> {out}")
    return EXIT_OK


def _cmd_select(args) -> int:
    candidates = {}
    for path in args.results:
        doc = json.loads(Path(path).read_text())
        name = doc.get("config") or Path(path).stem
        members = tuple(name.split("+"))
        score = doc["mean_foreground_dice"]
        candidates[members] = score
    choice = select_configuration(candidates)
    print(json.dumps({"selected": list(choice), "score": candidates[choice]}, indent=2))
    return EXIT_OK


def _cmd_postprocess_decide(args) -> int:
    pairs = _collect_label_pairs(Path(args.pred_dir), Path(args.ref_dir))
    n_classes = args.classes or max(p.num_classes for _, p, _ in pairs)
    decision = decide_postprocessing(pairs, n_classes)
    _dump({"schema_version": 1, **decision.to_dict()}, Path(args.output))
    print(f"postprocessing decision -> {args.output}: "
          f"joint={decision.all_foreground_as_one} per_class={decision.per_class}")
    return EXIT_OK


def _cmd_rank(args) -> int:
    from .report import render_rank_distribution

    with Path(args.scores).open() as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or len(rows[0]) < 2:
        raise EmptyInput(f"{args.scores}: need a header row and >= 2 algorithm rows")
    names = [row[0] for row in rows[1:]]
    scores = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    seed = _default_seed(args.seed)
    dist = bootstrap_ranking(scores, names, replicates=args.replicates, seed=seed)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _dump({"schema_version": 1, **dist.to_dict()}, out / "ranks.json")
    with (out / "ranks.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "mean_rank"])
        for name, mean in zip(dist.algorithms, dist.mean_ranks):
            writer.writerow([name, f"{mean:.6f}"])
    render_rank_distribution(dist, out / "ranks.png")
    summary = ", ".join(
        f"{n}={m:.2f}" for n, m in zip(dist.algorithms, dist.mean_ranks)
    )
    print(f"mean ranks over {args.replicates} replicates: {summary} -> {out}")
    return EXIT_OK


def _cmd_splits(args) -> int:
    dataset = Path(args.dataset)
    if dataset.is_dir():
        manifests = find_case_manifests(dataset)
        if not manifests:
            raise EmptyInput(f"no cases found in {dataset}")
        ids = [m.name[: -len(".case.json")] for m in manifests]
        groups = {i: case_group(m) for i, m in zip(ids, manifests)}
        groups = {i: g for i, g in groups.items() if g}
    else:
        ids = [line.strip() for line in dataset.read_text().splitlines() if line.strip()]
        groups = {}
    seed = _default_seed(args.seed)
    folds = make_cv_splits(ids, args.folds, groups, seed)
    doc = {"schema_version": 1, "seed": seed, "folds": folds}
    if args.output:
        _dump(doc, Path(args.output))
        print(f"{args.folds} folds over {len(ids)} cases -> {args.output}")
    else:
        print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = RunConfig(
        dataset_dir=Path(args.dataset_dir),
        output_dir=Path(args.output),
        budget_3d=args.budget_3d,
        budget_2d=args.budget_2d,
        seed=_default_seed(args.seed),
        configs=_parse_configs(args.configs),
        folds=args.folds,
        split_file=Path(args.splits) if args.splits else None,
        jobs=args.jobs,
    )
    return run_pipeline(cfg)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segplan",
        description="Self-configuring segmentation pipeline planner.",
    )
    parser.add_argument("--version", action="version", version=f"segplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fingerprint", help="compute a dataset fingerprint")
    p.add_argument("dataset_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_fingerprint)

    p = sub.add_parser("plan", help="generate pipeline configurations")
    p.add_argument("fingerprint")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--budget-3d", type=float, default=REFERENCE_BUDGET_3D)
    p.add_argument("--budget-2d", type=float, default=REFERENCE_BUDGET_2D)
    p.add_argument("--configs", default=None,
                   help="comma list, e.g. 2d,3d_fullres (default: automatic)")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("preprocess", help="apply planned preprocessing to a dataset")
    p.add_argument("plan")
    p.add_argument("dataset_dir")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("augment-preview", help="emit augmented patches for inspection")
    p.add_argument("case", help="case manifest path")
    p.add_argument("plan")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default="3d_fullres")
    p.add_argument("--count", type=int, default=4)
    p.set_defaults(func=_cmd_augment_preview)

    p = sub.add_parser("tile", help="print the sliding-window tiling plan")
    p.add_argument("--shape", required=True, help="e.g. 96,160,160")
    p.add_argument("--patch", required=True, help="e.g. 64,64,64")
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("ensemble", help="average stored probability volumes")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("evaluate", help="Dice evaluation of predictions vs references")
    p.add_argument("pred_dir")
    p.add_argument("ref_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--name", default=None, help="configuration name for bookkeeping")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("select", help="pick the best configuration or ensemble")
    p.add_argument("results", nargs="+")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("postprocess-decide",
                       help="benchmark largest-component suppression")
    p.add_argument("pred_dir")
    p.add_argument("ref_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--classes", type=int, default=None)
    p.set_defaults(func=_cmd_postprocess_decide)

    p = sub.add_parser("rank", help="bootstrap rank stability from a score matrix")
    p.add_argument("scores", help="CSV: header row, then one row per algorithm")
    p.add_argument("-o", "--output", default="rank-report")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("splits", help="build grouped cross-validation splits")
    p.add_argument("dataset", help="dataset dir or file with one case id per line")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_splits)

    p = sub.add_parser("run", help="fingerprint + plan + splits + preprocess")
    p.add_argument("dataset_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--budget-3d", type=float, default=REFERENCE_BUDGET_3D)
    p.add_argument("--budget-2d", type=float, default=REFERENCE_BUDGET_2D)
    p.add_argument("--configs", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--splits", default=None, help="explicit split file")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NoConvergence, BudgetTooSmall) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (IoFailure, TruncatedFile, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_IO
    except SegplanError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
