"""Command-line workbench: segment scenes, synthesize benchmarks, extract
features, train/evaluate/grid-search classifiers, and serve the labeling UI.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .features import HogParams, LbpParams
from .filters import AdaptiveParams, MeanShiftParams
from .learn import (
    accuracy,
    grid_search,
    load_model,
    save_model,
    stratified_split,
    weighted_f1,
)
from .learn.search import TRAINERS, train_family
from .pipeline import PipelineConfig, run_pipeline
from .raster import read_image, write_image
from .workbench.dataset import export_dataset, load_features, objects_to_records, save_features
from .workbench.manifest import read_manifest, write_manifest
from .workbench.server import serve
from .workbench.synthetic import SyntheticSpec, generate_synthetic_scene


def _rgb_triple(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
        raise argparse.ArgumentTypeError("expected R,G,B with 8-bit components")
    return tuple(parts)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline parameters")
    g.add_argument("--spatial-radius", type=int, default=10, help="mean shift spatial window radius")
    g.add_argument("--color-radius", type=float, default=20.0, help="mean shift color radius")
    g.add_argument("--ms-iterations", type=int, default=5, help="mean shift iteration cap")
    g.add_argument("--ms-eps", type=float, default=1.0, help="mean shift convergence threshold")
    g.add_argument("--otsu-fallback", type=int, default=127, help="level used when the histogram is degenerate")
    g.add_argument("--min-area-pre", type=int, default=500)
    g.add_argument("--blur-kernel", type=int, default=11)
    g.add_argument("--contour-color", type=_rgb_triple, default=(255, 255, 0), metavar="R,G,B")
    g.add_argument("--morph-kernel", type=int, default=3)
    g.add_argument("--min-area-seg", type=int, default=100)
    g.add_argument("--adaptive-block", type=int, default=77)
    g.add_argument("--adaptive-c", type=int, default=0)
    g.add_argument("--adaptive-polarity", choices=("darker", "brighter"), default="darker")
    g.add_argument("--min-area-refine", type=int, default=150)
    g.add_argument("--dilate-iterations", type=int, default=5)
    g.add_argument("--crop-size", type=int, default=84)
    g.add_argument("--background-color", type=_rgb_triple, default=(0, 255, 0), metavar="R,G,B")
    g.add_argument("--gray-source", choices=("hsv_value", "luma"), default="hsv_value")
    g.add_argument("--objects-brighter", action="store_true", help="objects are brighter than the background")
    g.add_argument("--refine-margin", type=int, default=10)


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        mean_shift=MeanShiftParams(
            spatial_radius=args.spatial_radius,
            color_radius=args.color_radius,
            max_iterations=args.ms_iterations,
            convergence_eps=args.ms_eps,
        ),
        otsu_fallback=args.otsu_fallback,
        min_area_pre=args.min_area_pre,
        blur_kernel=args.blur_kernel,
        contour_color=args.contour_color,
        morph_kernel=args.morph_kernel,
        min_area_seg=args.min_area_seg,
        adaptive=AdaptiveParams(
            block_size=args.adaptive_block, c=args.adaptive_c, polarity=args.adaptive_polarity
        ),
        min_area_refine=args.min_area_refine,
        dilate_iterations=args.dilate_iterations,
        crop_size=args.crop_size,
        background_color=args.background_color,
        gray_source=args.gray_source,
        objects_darker=not args.objects_brighter,
        refine_margin=args.refine_margin,
    )


def _cmd_segment(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_records = []
    for image_path in args.images:
        image_path = Path(image_path)
        img = read_image(image_path)
        objects, trace = run_pipeline(img, cfg, source=image_path.stem, trace=args.trace)
        if args.trace:
            trace.write(out / "trace", image_path.stem)
        all_records.extend(objects_to_records(objects, out / "objects", manifest_dir=out))
        print(f"{image_path}: {len(objects)} objects")
    write_manifest(all_records, out / "manifest.jsonl")
    print(f"wrote {len(all_records)} records to {out / 'manifest.jsonl'}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec_args = json.loads(Path(args.spec).read_text()) if args.spec else {}
    spec = SyntheticSpec(**spec_args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    img, truths = generate_synthetic_scene(spec)
    write_image(img, out / "scene.png")
    truth_payload = []
    masks_dir = out / "truth_masks"
    masks_dir.mkdir(exist_ok=True)
    for i, t in enumerate(truths):
        write_image(t.mask, masks_dir / f"object_{i:03d}.png")
        truth_payload.append({"center": list(t.center), "area": t.area, "mask": f"truth_masks/object_{i:03d}.png"})
    (out / "truth.json").write_text(json.dumps({"seed": spec.seed, "objects": truth_payload}, indent=2))
    print(f"wrote scene with {len(truths)} objects to {out}")
    return 0


def _cmd_features(args: argparse.Namespace) -> int:
    records = read_manifest(args.manifest)
    root = Path(args.manifest).parent
    hp = HogParams()
    lp = LbpParams()
    data = export_dataset(records, root, kind=args.kind, hog_params=hp, lbp_params=lp)
    save_features(args.out, data)
    counts = data.class_counts()
    print(f"extracted {len(data)} x {data.dimension} {args.kind} features; class counts {counts}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    data = load_features(args.features)
    params = json.loads(args.params) if args.params else {}
    if args.split_seed is not None:
        data, held_out = stratified_split(data, args.test_fraction, args.split_seed)
        print(f"training on {len(data)} samples ({len(held_out)} held out, seed {args.split_seed})")
    model = train_family(args.family, data, params)
    save_model(model, args.out)
    pred = model.predict(data.features)
    print(
        f"{args.family} trained: accuracy {accuracy(data.labels, pred):.4f} "
        f"weighted F1 {weighted_f1(data.labels, pred):.4f} (training set); saved to {args.out}"
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    data = load_features(args.features)
    model = load_model(args.model)
    _, test = stratified_split(data, args.test_fraction, args.split_seed)
    pred = model.predict(test.features)
    acc = accuracy(test.labels, pred)
    f1 = weighted_f1(test.labels, pred)
    print(f"{'MODEL':<12}{'ACCURACY':>12}{'F1 SCORE':>12}")
    print(f"{model.family.upper():<12}{acc:>12.4f}{f1:>12.4f}")
    if args.json:
        Path(args.json).write_text(
            json.dumps({"family": model.family, "accuracy": acc, "weighted_f1": f1, "test_size": len(test)})
        )
    return 0


def _cmd_gridsearch(args: argparse.Namespace) -> int:
    data = load_features(args.features)
    grid = json.loads(Path(args.grid).read_text())
    if not isinstance(grid, list):
        raise SystemExit("grid file must hold a JSON list of parameter objects")
    report = grid_search(data, args.family, grid, trials=args.trials, seed=args.seed)
    print(f"{'CANDIDATE':<44}{'MEAN ACC':>10}")
    for i, cand in enumerate(report.candidates):
        marker = " *" if i == report.winner_index else "  "
        print(f"{marker}{json.dumps(cand.params):<42}{cand.mean_accuracy:>10.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_state(), indent=2))
        print(f"report written to {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    serve(args.manifest, args.port, image_root=args.image_root, static_dir=args.static)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="slidebench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment slide images into object crops")
    p.add_argument("images", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action="store_true", help="write stage rasters a..h for audit")
    _add_pipeline_flags(p)
    p.set_defaults(fn=_cmd_segment)

    p = sub.add_parser("synth", help="generate a synthetic benchmark scene")
    p.add_argument("--spec", help="JSON file of scene parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("features", help="extract descriptors from labeled manifest objects")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", choices=("hog", "lbp"), default="hog")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_features)

    p = sub.add_parser("train", help="train a classifier on a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--family", choices=sorted(TRAINERS), required=True)
    p.add_argument("--params", help="JSON object of family parameters")
    p.add_argument("--out", required=True)
    p.add_argument("--split-seed", type=int, help="train on the large side of a stratified split")
    p.add_argument("--test-fraction", type=float, default=0.15)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on the held-out split side")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--split-seed", type=int, required=True)
    p.add_argument("--test-fraction", type=float, default=0.15)
    p.add_argument("--json", help="also write a machine-readable report")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("gridsearch", help="pick parameters by repeated-split accuracy")
    p.add_argument("--features", required=True)
    p.add_argument("--family", choices=sorted(TRAINERS), required=True)
    p.add_argument("--grid", required=True, help="JSON list of parameter objects")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(fn=_cmd_gridsearch)

    p = sub.add_parser("serve", help="run the labeling service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--image-root", help="directory the manifest's relative paths resolve against")
    p.add_argument("--static", help="directory of frontend static files")
    p.set_defaults(fn=_cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
