"""Acceptance criteria, one test per criterion.

Each test prints one `criterion NN <name>: PASS/FAIL` line (visible with
`pytest -s` or in failure output). Tolerances are pinned here, not
configurable. Run: pytest tests/test_acceptance.py -v -s
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from depthproj import _png
from depthproj.depth_image import decode_depth, encode_depth
from depthproj.geometry import (CameraIntrinsics, RigidTransform, backproject,
                                project, transform_point)
from depthproj.losses import berhu_of_residuals, compute_metrics
from depthproj.pipeline import compare_runs, load_pipeline_config, run_pipeline
from depthproj.project import project_sparse
from depthproj.reliable import FilterParams, filter_reliable, noise_rate, sweep_params
from depthproj.scene import oracle_label
from depthproj._kernels import backends
from util import random_sparse

from test_pipeline import write_cfg


def verdict(num, name, ok, detail=""):
    state = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d} {name}: {state} {detail}".rstrip())
    assert ok, f"criterion {num:02d} {name}: {detail}"


def _stereo_like_rig(rng, w, h):
    """Plausible camera pair: moderate field of view, small relative pose."""

    def intrinsics():
        f = float(rng.uniform(0.6, 2.0)) * w
        return CameraIntrinsics(f, f * float(rng.uniform(0.9, 1.1)),
                                float(rng.uniform(0.3, 0.7)) * w,
                                float(rng.uniform(0.3, 0.7)) * h, w, h)

    a, b = rng.uniform(-0.05, 0.05, 2)
    ry = RigidTransform.rotation_y(a)
    rx = RigidTransform(np.array([[1, 0, 0],
                                  [0, np.cos(b), -np.sin(b)],
                                  [0, np.sin(b), np.cos(b)]]), np.zeros(3))
    from depthproj.geometry import compose
    t = RigidTransform(compose(ry, rx).rotation, rng.uniform(-1.0, 1.0, 3))
    return intrinsics(), intrinsics(), t


def test_criterion_01_geometry_round_trip():
    rng = np.random.default_rng(101)
    cases_total = 0
    worst_coord = 0.0
    depth_exact = True
    start = time.perf_counter()
    for _ in range(100):
        w, h = int(rng.integers(64, 2000)), int(rng.integers(64, 2000))
        k_src, k_dst, t = _stereo_like_rig(rng, w, h)
        n = 1000
        u = rng.integers(0, w, n)
        v = rng.integers(0, h, n)
        d = rng.uniform(2.5, 80.0, n)

        # chain under test: backproject -> transform -> project
        pts = transform_point(t, backproject((u, v), d, k_src))
        uu, vv, dd = project(pts, k_dst)

        # independent oracle: one-shot homogeneous matrix chain
        k1_inv = np.array([[1 / k_src.fx, 0, -k_src.cx / k_src.fx],
                           [0, 1 / k_src.fy, -k_src.cy / k_src.fy],
                           [0, 0, 1.0]])
        k2 = np.array([[k_dst.fx, 0, k_dst.cx], [0, k_dst.fy, k_dst.cy], [0, 0, 1.0]])
        hom = np.stack([u * d, v * d, d], axis=-1)
        cam2 = hom @ k1_inv.T @ t.rotation.T + t.translation
        pix = cam2 @ k2.T
        exp_u, exp_v = pix[:, 0] / pix[:, 2], pix[:, 1] / pix[:, 2]

        worst_coord = max(worst_coord,
                          float(np.max(np.abs(uu - exp_u))),
                          float(np.max(np.abs(vv - exp_v))))
        depth_exact &= bool(np.array_equal(dd, pts[:, 2]))

        # same-camera closed loop recovers the pixel
        u2, v2, d2 = project(backproject((u, v), d, k_src), k_src)
        worst_coord = max(worst_coord, float(np.max(np.abs(u2 - u))),
                          float(np.max(np.abs(v2 - v))))
        depth_exact &= bool(np.array_equal(d2, d))
        cases_total += n
    elapsed = time.perf_counter() - start
    ok = cases_total >= 100_000 and worst_coord < 1e-9 and depth_exact and elapsed < 1.0
    verdict(1, "geometry-round-trip", ok,
            f"cases={cases_total} worst={worst_coord:.2e} "
            f"depth_exact={depth_exact} runtime={elapsed:.2f}s")


def test_criterion_02_identity_rig_lossless():
    rng = np.random.default_rng(102)
    k = CameraIntrinsics(300.0, 300.0, 63.5, 47.5, 128, 96)
    ident = RigidTransform.identity()
    worst = 0.0
    support_ok = True
    for _ in range(100):
        src = random_sparse(rng, k.width, k.height,
                            density=float(rng.uniform(0.02, 0.5)))
        res = project_sparse(src, k, ident, k)
        support_ok &= bool(np.array_equal(res.projected.valid, src.valid))
        if src.valid_count:
            worst = max(worst, float(np.max(
                np.abs(res.projected.values - src.values)[src.valid])))
    ok = support_ok and worst <= 1e-9
    verdict(2, "identity-rig-lossless", ok, f"support={support_ok} worst={worst:.2e}")


def test_criterion_03_see_through_one_sided(scanline50):
    violations = 0
    zero_eta_scenes = 0
    for c in scanline50:
        noisy = oracle_label(c.projected, c.truth, tol=0.3)
        vals, tr = c.projected.values[noisy], c.truth.values[noisy]
        violations += int((vals <= tr).sum())
        if noise_rate(c.projected, c.truth, 0.3).eta == 0.0:
            zero_eta_scenes += 1
    ok = violations == 0 and zero_eta_scenes == 0
    verdict(3, "see-through-one-sided", ok,
            f"scenes={len(scanline50)} violations={violations} "
            f"zero_eta_scenes={zero_eta_scenes}")


def test_criterion_04_filter_exact_on_separable_scenes(scanline50):
    params = FilterParams(window=16, thickness=0.5)
    precondition_ok = True
    bad_scenes = 0
    for c in scanline50:
        # precondition: every tile holding a noisy point also holds a point
        # at the occluding surface (within the noise tolerance of the tile's
        # minimum ground truth under projected points)
        noisy = oracle_label(c.projected, c.truth, tol=0.3)
        clean_fg = c.projected.valid & ~noisy
        h, w = c.projected.values.shape
        for ty, tx in zip(*np.nonzero(np.add.reduceat(
                np.add.reduceat(noisy, np.arange(0, h, 16), axis=0),
                np.arange(0, w, 16), axis=1) > 0)):
            sl = np.s_[ty * 16:(ty + 1) * 16, tx * 16:(tx + 1) * 16]
            truth_under = c.truth.values[sl][c.projected.valid[sl]]
            fg_vals = c.projected.values[sl][clean_fg[sl]]
            if fg_vals.size == 0 or fg_vals.min() > truth_under.min() + 0.3:
                precondition_ok = False
        rps = filter_reliable(c.projected, params)
        if oracle_label(rps.kept, c.truth, tol=0.3).sum() != 0:
            bad_scenes += 1
    ok = precondition_ok and bad_scenes == 0
    verdict(4, "filter-exact-on-separable-scenes", ok,
            f"precondition={precondition_ok} scenes_with_kept_noise={bad_scenes}")


def test_criterion_05_filtering_halves_noise(bernoulli50):
    raw, filt, dropped = [], [], []
    for c in bernoulli50:
        raw.append(noise_rate(c.projected, c.truth, 0.3).eta)
        rep = noise_rate(filter_reliable(c.projected, FilterParams(16, 0.5)),
                         c.truth, 0.3)
        filt.append(rep.eta)
        dropped.append(rep.dropped_fraction)
    mean_raw, mean_filt, mean_drop = map(np.mean, (raw, filt, dropped))
    reduction = 1.0 - mean_filt / mean_raw
    ok = 0.04 <= mean_raw <= 0.08 and reduction >= 0.5 and mean_drop <= 0.6
    verdict(5, "filtering-halves-noise", ok,
            f"raw={mean_raw:.4f} filtered={mean_filt:.6f} "
            f"reduction={reduction:.2%} dropped={mean_drop:.2%}")


KITTI_HELP = ("set KITTI_SPARSE_DIR and KITTI_GT_DIR to directories of matching "
              "benchmark depth PNGs to check the reference noise-rate figures")


@pytest.mark.skipif(not (os.environ.get("KITTI_SPARSE_DIR")
                         and os.environ.get("KITTI_GT_DIR")),
                    reason="optional local-dataset check; " + KITTI_HELP)
def test_criterion_05_optional_kitti_reference():
    sparse_dir = os.environ.get("KITTI_SPARSE_DIR")
    gt_dir = os.environ.get("KITTI_GT_DIR")
    from depthproj.cli import main
    import io
    from contextlib import redirect_stdout
    buf = io.StringIO()
    with redirect_stdout(buf):
        assert main(["real-eta", "--sparse-dir", sparse_dir, "--gt-dir", gt_dir]) == 0
    got = dict(line.split() for line in buf.getvalue().splitlines())
    ok = (abs(float(got["eta_raw"]) - 0.058) <= 0.015
          and abs(float(got["eta_filtered"]) - 0.017) <= 0.015
          and abs(float(got["dropped_fraction"]) - 0.458) <= 0.015)
    verdict(5, "kitti-reference-figures", ok, str(got))


def test_criterion_06_sweep_curves_monotone(bernoulli50):
    res = sweep_params([c.pair for c in bernoulli50])
    w_etas = [p.mean_eta for p in res.window_curve]
    t_etas = [p.mean_eta for p in res.thickness_curve]
    w_violations = sum(b > a for a, b in zip(w_etas, w_etas[1:]))
    t_violations = sum(b < a for a, b in zip(t_etas, t_etas[1:]))
    ok = w_violations == 0 and t_violations == 0
    verdict(6, "sweep-curves-monotone", ok,
            f"window_curve={['%.5f' % e for e in w_etas]} "
            f"thickness_curve={['%.5f' % e for e in t_etas]}")


def test_criterion_07_filter_property_suite():
    rng = np.random.default_rng(107)
    n_maps = 10_000
    violations = dict(subset=0, band=0, theta_mono=0, min_kept=0, idempotent=0)
    impls = backends()
    tile_min = impls.get("c", impls["python"]).tile_min
    for _ in range(n_maps):
        h, w = int(rng.integers(4, 28)), int(rng.integers(4, 28))
        wp = int(rng.integers(1, 9))
        theta = float(rng.choice([0.0, 0.1, 0.5, 1.5]))
        s = random_sparse(rng, w, h, density=float(rng.uniform(0.05, 0.7)))
        params = FilterParams(wp, theta)
        rps = filter_reliable(s, params)

        if np.any(rps.kept.valid & ~s.valid):
            violations["subset"] += 1
        vv, uu = np.nonzero(rps.kept.valid)
        if len(vv):
            dm = rps.window_min[vv // wp, uu // wp]
            vals = rps.kept.values[vv, uu]
            if not (np.all(vals >= dm) and np.all(vals <= dm + theta)):
                violations["band"] += 1
        kept_min = np.asarray(tile_min(rps.kept.values,
                                       rps.kept.valid.view(np.uint8), wp))
        occupied = ~np.isnan(rps.window_min)
        if not np.array_equal(kept_min[occupied], rps.window_min[occupied]):
            violations["min_kept"] += 1
        wider = filter_reliable(s, FilterParams(wp, theta + 0.9))
        if np.any(rps.kept.valid & ~wider.kept.valid):
            violations["theta_mono"] += 1
        again = filter_reliable(rps.kept, params)
        if again.dropped_count != 0:
            violations["idempotent"] += 1
    ok = all(v == 0 for v in violations.values())
    verdict(7, "filter-property-suite", ok, f"maps={n_maps} violations={violations}")


def test_criterion_08_berhu_correctness():
    rng = np.random.default_rng(108)
    worked = berhu_of_residuals(np.array([0.1, 1.0]))
    worked_ok = abs(worked - 1.35) <= 1e-12

    continuity_worst = 0.0
    order_violations = 0
    equality_violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 50))
        r = rng.uniform(0, 10, n)
        if rng.random() < 0.05:
            r = np.zeros(n)  # exercise the equality side
        amax = float(np.abs(r).max())
        c = 0.2 * amax
        if c > 0:
            continuity_worst = max(continuity_worst, abs((c * c + c * c) / (2 * c) - c))
        b = berhu_of_residuals(r)
        m = float(np.abs(r).mean())
        if b < m - 1e-15:
            order_violations += 1
        all_below = bool(np.all(np.abs(r) <= c))
        if all_below and abs(b - m) > 1e-12:
            equality_violations += 1
        if not all_below and not (b > m):
            equality_violations += 1
    ok = (worked_ok and continuity_worst <= 1e-12
          and order_violations == 0 and equality_violations == 0)
    verdict(8, "berhu-correctness", ok,
            f"worked={worked!r} continuity={continuity_worst:.2e} "
            f"order_violations={order_violations} equality_violations={equality_violations}")


def test_criterion_09_metrics():
    rng = np.random.default_rng(109)
    from depthproj.depth_image import DenseDepthMap
    order_violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 40))
        gt = rng.uniform(1, 70, n)
        pred = np.abs(gt + rng.normal(0, 2, n)) + 1e-3
        rep = compute_metrics(DenseDepthMap(pred[None, :], np.ones((1, n), bool)),
                              DenseDepthMap(gt[None, :], np.ones((1, n), bool)))
        if rep.rmse_mm < rep.mae_mm - 1e-9:
            order_violations += 1

    perfect = compute_metrics(
        DenseDepthMap(np.full((4, 4), 7.0), np.ones((4, 4), bool)),
        DenseDepthMap(np.full((4, 4), 7.0), np.ones((4, 4), bool)))
    perfect_ok = (perfect.rmse_mm, perfect.mae_mm,
                  perfect.irmse_per_km, perfect.imae_per_km) == (0, 0, 0, 0)

    script = Path(__file__).resolve().parents[1] / "scripts" / "unit_check.py"
    out = subprocess.run([sys.executable, str(script)],
                         capture_output=True, text=True)
    script_ok = out.returncode == 0
    if script_ok:
        expected = {k: float(v) for k, v in
                    (line.split() for line in out.stdout.splitlines())}
        import importlib.util
        spec = importlib.util.spec_from_file_location("unit_check", script)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
        pred = np.array([[p for p, _ in mod.CASES]])
        gt = np.array([[g for _, g in mod.CASES]])
        rep = compute_metrics(DenseDepthMap(pred, np.ones_like(pred, bool)),
                              DenseDepthMap(gt, np.ones_like(gt, bool)))
        for key, got in (("rmse_mm", rep.rmse_mm), ("mae_mm", rep.mae_mm),
                         ("irmse_per_km", rep.irmse_per_km),
                         ("imae_per_km", rep.imae_per_km)):
            script_ok &= abs(got - expected[key]) <= 1e-9 * max(1.0, abs(expected[key]))
    ok = order_violations == 0 and perfect_ok and script_ok
    verdict(9, "metrics", ok,
            f"order_violations={order_violations} perfect={perfect_ok} "
            f"unit_script={script_ok}")


def test_criterion_10_codec(tmp_path):
    codes = np.arange(1, 65536, dtype=np.uint16)
    round_trip_ok = bool(np.array_equal(encode_depth(decode_depth(codes)), codes))

    rng = np.random.default_rng(110)
    d = rng.uniform(1 / 512, 255.9, 500_000)
    err = np.abs(decode_depth(encode_depth(d)) - d)
    quant_ok = float(err.max()) <= 1 / 512

    # interchange: the code plane is round(depth * 256) with 0 invalid, and
    # files are plain 16-bit grayscale PNGs any benchmark reader can open
    pil_ok = True
    try:
        from PIL import Image
        plane = rng.integers(0, 65536, (37, 53)).astype(np.uint16)
        ours = tmp_path / "ours.png"
        ours.write_bytes(_png.encode_gray16(plane))
        pil_ok &= bool(np.array_equal(np.asarray(Image.open(ours)), plane))
        theirs = tmp_path / "theirs.png"
        Image.fromarray(plane).save(theirs)
        pil_ok &= bool(np.array_equal(_png.decode_gray16(theirs.read_bytes()), plane))
    except ImportError:
        pil_ok = True  # optional reader not installed; format checks above stand
    depth_rule_ok = (int(encode_depth(np.array([1.0]))[0]) == 256
                     and int(encode_depth(np.array([12.345]))[0]) == 3160)
    ok = round_trip_ok and quant_ok and pil_ok and depth_rule_ok
    verdict(10, "codec", ok,
            f"code_round_trip={round_trip_ok} max_quant_err={err.max():.6f} "
            f"interchange={pil_ok} depth_rule={depth_rule_ok}")


def test_criterion_11_pipeline_determinism(tmp_path):
    cfg_a = load_pipeline_config(write_cfg(tmp_path, name="a.cfg", out="run_a",
                                           seed=31, n=4, workers=1))
    cfg_b = load_pipeline_config(write_cfg(tmp_path, name="b.cfg", out="run_b",
                                           seed=31, n=4, workers=4))
    run_pipeline(cfg_a)
    run_pipeline(cfg_b)
    diff = compare_runs(tmp_path / "run_a" / "manifest.json",
                        tmp_path / "run_b" / "manifest.json")
    rerun_dir = tmp_path / "run_a2"
    cfg_a2 = load_pipeline_config(write_cfg(tmp_path, name="a2.cfg", out="run_a2",
                                            seed=31, n=4, workers=1))
    run_pipeline(cfg_a2)
    diff2 = compare_runs(tmp_path / "run_a" / "manifest.json",
                         rerun_dir / "manifest.json")
    ok = diff.differing == () and diff2.differing == () and diff.missing_in_a == ()
    verdict(11, "pipeline-determinism", ok,
            f"across_workers_diffs={len(diff.differing)} across_runs_diffs={len(diff2.differing)}")
