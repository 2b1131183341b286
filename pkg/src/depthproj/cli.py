"""Command-line interface.

Subcommands mirror the pipeline stages so any run can be reproduced
stage by stage from the seeds recorded in a manifest:

    gen-scene   write a procedural scene file
    render      ray-cast a scene to a depth PNG for one rig camera
    sparsify    dense depth PNG -> sparse depth PNG (bernoulli or mask)
    project     sparse depth PNG -> another camera's grid
    filter      keep the reliable points of a sparse depth PNG
    sweep       pick filter parameters from a corpus of (proj, truth) pairs
    eval        depth-completion metrics between two depth PNGs
    real-eta    raw/filtered noise rates over a real sparse+gt directory pair
    pipeline    run end-to-end experiments / compare two run manifests

Exit codes: 0 success, 1 configuration or input error, 2 stage failure,
3 comparison found differences.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .depth_image import read_depth_png, write_depth_png
from .errors import DepthProjError, StageError
from .geometry import RigidTransform, load_calibration
from .losses import compute_metrics
from .pipeline import compare_runs, load_pipeline_config, run_pipeline
from .project import project_to_rig_camera, random_target_camera
from .reliable import FilterParams, filter_reliable, noise_rate, sweep_params
from .scene import SceneGenConfig, generate_scene, load_scene, render_depth, save_scene
from .sparsify import BernoulliConfig, MaskBank, sparsify_bernoulli, sparsify_with_mask

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STAGE = 2
EXIT_DIFF = 3


def _print_kv(pairs):
    for key, value in pairs:
        print(f"{key} {value}")


def _cmd_gen_scene(args) -> int:
    cfg = SceneGenConfig(
        n_occluders=args.n_occluders,
        occluder_depth=tuple(args.occluder_depth),
        background_depth=tuple(args.background_depth),
        extent=tuple(args.extent),
        lateral=tuple(args.lateral),
        vertical=tuple(args.vertical),
        seed=args.seed,
    )
    save_scene(generate_scene(cfg), args.out)
    return EXIT_OK


def _cmd_render(args) -> int:
    rig = load_calibration(args.calib)
    scene = load_scene(args.scene)
    if args.camera == "lidar":
        pose, k = RigidTransform.identity(), rig.lidar
    else:
        cam = rig.camera(args.camera)
        pose, k = cam.from_lidar, cam.intrinsics
    write_depth_png(render_depth(scene, pose, k), args.out)
    return EXIT_OK


def _cmd_sparsify(args) -> int:
    dense = read_depth_png(args.input).to_dense()
    if args.mode == "bernoulli":
        sparse = sparsify_bernoulli(dense, BernoulliConfig(args.p, args.seed))
        mask_id = None
    else:
        if not args.mask_dir:
            print("error: --mask-dir is required for --mode mask", file=sys.stderr)
            return EXIT_CONFIG
        bank = MaskBank.from_dir(args.mask_dir, seed=args.seed)
        sparse, mask_id = sparsify_with_mask(dense, bank, draw_index=args.draw_index)
    write_depth_png(sparse, args.out)
    _print_kv([("kept_points", sparse.valid_count),
               ("kept_fraction", f"{sparse.valid_fraction:.6f}"),
               ("mask_id", mask_id if mask_id is not None else "-")])
    return EXIT_OK


def _cmd_project(args) -> int:
    rig = load_calibration(args.calib)
    src = read_depth_png(args.input)
    target = args.target
    if target == "random":
        target = random_target_camera(rig, args.seed)
    result = project_to_rig_camera(src, rig, target)
    write_depth_png(result.projected, args.out)
    _print_kv([("target", target)] + sorted(result.stats.as_dict().items()))
    return EXIT_OK


def _cmd_filter(args) -> int:
    sparse = read_depth_png(args.input)
    rps = filter_reliable(sparse, FilterParams(args.wp, args.theta))
    write_depth_png(rps.kept, args.out)
    pairs = [("kept_points", rps.kept.valid_count),
             ("dropped_fraction", f"{rps.dropped_fraction:.6f}")]
    if args.truth:
        truth = read_depth_png(args.truth).to_dense()
        raw = noise_rate(sparse, truth, args.tol)
        filt = noise_rate(rps, truth, args.tol)
        pairs += [("eta_raw", f"{raw.eta:.6f}"), ("eta_filtered", f"{filt.eta:.6f}")]
    _print_kv(pairs)
    return EXIT_OK


def _corpus_pairs(directory):
    directory = Path(directory)
    pairs = []
    for proj_path in sorted(directory.glob("*.proj.png")):
        truth_path = proj_path.with_name(proj_path.name[:-len(".proj.png")] + ".truth.png")
        if not truth_path.exists():
            raise DepthProjError(f"no matching truth file for {proj_path.name}")
        pairs.append((read_depth_png(proj_path, provenance="projected"),
                      read_depth_png(truth_path).to_dense()))
    if not pairs:
        raise DepthProjError(
            f"no '<stem>.proj.png' / '<stem>.truth.png' pairs found in {directory}")
    return pairs


def _cmd_sweep(args) -> int:
    corpus = _corpus_pairs(args.corpus_dir)
    result = sweep_params(
        corpus,
        window_grid=[int(t) for t in args.wp_grid.split(",")],
        thickness_grid=[float(t) for t in args.theta_grid.split(",")],
        tol=args.tol, max_drop=args.max_drop, slack=args.slack)
    _print_kv([("selected_wp", result.params.window),
               ("selected_theta", result.params.thickness)])
    for p in result.window_curve:
        print(f"wp_curve {p.value:g} {p.mean_eta:.6f} {p.mean_dropped:.6f}")
    for p in result.thickness_curve:
        print(f"theta_curve {p.value:g} {p.mean_eta:.6f} {p.mean_dropped:.6f}")
    for note in result.notes:
        print(f"note {note}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred = read_depth_png(args.pred).to_dense()
    gt = read_depth_png(args.gt)
    report = compute_metrics(pred, gt)
    _print_kv([
        ("rmse_mm", f"{report.rmse_mm:.6f}"),
        ("mae_mm", f"{report.mae_mm:.6f}"),
        ("irmse_per_km", f"{report.irmse_per_km:.6f}"),
        ("imae_per_km", f"{report.imae_per_km:.6f}"),
        ("evaluated_count", report.evaluated_count),
        ("inverse_excluded", report.inverse_excluded),
    ])
    return EXIT_OK


def _cmd_real_eta(args) -> int:
    """Noise rates of real sparse depth against its ground truth files.

    Expects two directories with identically named depth PNGs. Reported:
    raw eta, filtered eta at the given parameters, and the dropped
    fraction, aggregated over all points.
    """
    sparse_dir, gt_dir = Path(args.sparse_dir), Path(args.gt_dir)
    names = sorted(p.name for p in sparse_dir.glob("*.png"))
    if not names:
        raise DepthProjError(f"no .png files in {sparse_dir}")
    raw_noisy = raw_total = 0
    kept_noisy = kept_total = 0
    n_input = n_kept = 0
    params = FilterParams(args.wp, args.theta)
    for name in names:
        gt_path = gt_dir / name
        if not gt_path.exists():
            raise DepthProjError(f"missing ground truth for {name}")
        sparse = read_depth_png(sparse_dir / name)
        truth = read_depth_png(gt_path).to_dense()
        rps = filter_reliable(sparse, params)
        n_input += sparse.valid_count
        n_kept += rps.kept.valid_count
        for s, acc in ((sparse, "raw"), (rps.kept, "kept")):
            both = s.valid & truth.valid
            noisy = int((both & (np.abs(s.values - truth.values) > args.tol)).sum())
            if acc == "raw":
                raw_noisy += noisy
                raw_total += int(both.sum())
            else:
                kept_noisy += noisy
                kept_total += int(both.sum())
    if raw_total == 0 or kept_total == 0:
        raise DepthProjError("no points with ground truth coverage")
    _print_kv([
        ("files", len(names)),
        ("eta_raw", f"{raw_noisy / raw_total:.6f}"),
        ("eta_filtered", f"{kept_noisy / kept_total:.6f}"),
        ("dropped_fraction", f"{1.0 - n_kept / n_input:.6f}"),
    ])
    return EXIT_OK


def _cmd_pipeline_run(args) -> int:
    cfg = load_pipeline_config(args.config)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    manifest = run_pipeline(cfg)
    print(f"wrote {cfg.out_dir / 'manifest.json'} ({len(manifest['scenes'])} scenes)")
    return EXIT_OK


def _cmd_pipeline_compare(args) -> int:
    diff = compare_runs(args.manifest_a, args.manifest_b)
    for rel in diff.differing:
        print(f"differs {rel}")
    for rel in diff.missing_in_a:
        print(f"missing_in_a {rel}")
    for rel in diff.missing_in_b:
        print(f"missing_in_b {rel}")
    for path in diff.missing_on_disk:
        print(f"missing_on_disk {path}")
    if diff.clean:
        print("identical")
        return EXIT_OK
    return EXIT_DIFF


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthproj",
        description="Simulate, filter and evaluate projection noise on depth maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scene", help="write a procedural scene file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-occluders", type=int, default=3)
    p.add_argument("--occluder-depth", type=float, nargs=2, default=[4.0, 8.0])
    p.add_argument("--background-depth", type=float, nargs=2, default=[18.0, 22.0])
    p.add_argument("--extent", type=float, nargs=2, default=[0.5, 2.5])
    p.add_argument("--lateral", type=float, nargs=2, default=[-6.0, 6.0])
    p.add_argument("--vertical", type=float, nargs=2, default=[-0.5, 1.5])
    p.set_defaults(func=_cmd_gen_scene)

    p = sub.add_parser("render", help="render a scene to a depth PNG")
    p.add_argument("--scene", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--camera", default="lidar",
                   help="'lidar' or an RGB camera name from the calibration")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("sparsify", help="sparsify a dense depth PNG")
    p.add_argument("--mode", choices=["bernoulli", "mask"], default="bernoulli")
    p.add_argument("--p", type=float, default=0.1, help="bernoulli keep probability")
    p.add_argument("--mask-dir", help="directory of depth PNGs used as masks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draw-index", type=int, default=0,
                   help="which draw of the mask bank to take")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sparsify)

    p = sub.add_parser("project", help="project sparse depth into another camera")
    p.add_argument("--calib", required=True)
    p.add_argument("--target", default="random",
                   help="camera name from the calibration, or 'random'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("filter", help="keep the reliable points of a sparse map")
    p.add_argument("--wp", type=int, default=16, help="pooling window in pixels")
    p.add_argument("--theta", type=float, default=0.5, help="thickness band in meters")
    p.add_argument("--tol", type=float, default=0.3)
    p.add_argument("--truth", help="optional truth PNG; prints noise rates")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("sweep", help="select filter parameters from a corpus")
    p.add_argument("--corpus-dir", required=True,
                   help="directory of <stem>.proj.png / <stem>.truth.png pairs")
    p.add_argument("--wp-grid", default="2,4,8,16,32")
    p.add_argument("--theta-grid", default="0.1,0.25,0.5,1.0,2.0")
    p.add_argument("--tol", type=float, default=0.3)
    p.add_argument("--max-drop", type=float, default=0.6)
    p.add_argument("--slack", type=float, default=0.05)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("eval", help="depth metrics between two depth PNGs")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("real-eta", help="noise rates on a real dataset directory")
    p.add_argument("--sparse-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--wp", type=int, default=16)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=0.3)
    p.set_defaults(func=_cmd_real_eta)

    p = sub.add_parser("pipeline", help="end-to-end runs")
    psub = p.add_subparsers(dest="pipeline_command", required=True)
    pr = psub.add_parser("run", help="run a pipeline config")
    pr.add_argument("config")
    pr.add_argument("--workers", type=int, default=None)
    pr.set_defaults(func=_cmd_pipeline_run)
    pc = psub.add_parser("compare", help="compare two run manifests")
    pc.add_argument("manifest_a")
    pc.add_argument("manifest_b")
    pc.set_defaults(func=_cmd_pipeline_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (DepthProjError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
