"""End-to-end experiment driver.

Composes scene generation, rendering, sparsification, projection,
filtering and evaluation into reproducible runs. Every stage seed is
derived by hashing (global seed, stage name, scene index), so adding or
removing scenes never shifts the randomness of other scenes, and a run is
reproducible from its manifest alone.

Scenes are independent and may run in parallel (``workers`` in the config,
capped by the DEPTHPROJ_MAX_WORKERS environment variable); outputs are a
pure function of (config, seed), so hashes are identical at any worker
count. While a scene is being computed its files carry a ``.partial``
suffix; they are renamed on scene completion, so an aborted run leaves
only ``.partial`` leftovers behind for the failed scene. The manifest is
written last.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import kvconfig
from .depth_image import write_depth_png
from .errors import ConfigError, EmptyInputError, StageError
from .geometry import RigidTransform, load_calibration
from .losses import compute_metrics
from .project import project_to_rig_camera, random_target_camera
from .reliable import (DEFAULT_MAX_DROP, DEFAULT_SLACK, DEFAULT_THETA_GRID,
                       DEFAULT_WP_GRID, FilterParams, filter_reliable,
                       noise_rate, sweep_params)
from .scene import DEFAULT_NOISE_TOL, SceneGenConfig, generate_scene, render_depth, save_scene
from .sparsify import BernoulliConfig, MaskBank, sparsify_bernoulli, sparsify_with_mask

MANIFEST_NAME = "manifest.json"
WORKERS_ENV = "DEPTHPROJ_MAX_WORKERS"


@dataclass(frozen=True)
class SweepSettings:
    window_grid: tuple = DEFAULT_WP_GRID
    thickness_grid: tuple = DEFAULT_THETA_GRID
    max_drop: float = DEFAULT_MAX_DROP
    slack: float = DEFAULT_SLACK


@dataclass(frozen=True)
class PipelineConfig:
    calib_path: Path
    out_dir: Path
    seed: int = 0
    n_scenes: int = 1
    workers: int = 1
    target: str = "random"
    tol: float = DEFAULT_NOISE_TOL
    scene: SceneGenConfig = SceneGenConfig()
    sparsify_mode: str = "bernoulli"
    keep_probability: float = 0.1
    mask_dir: Path | None = None
    filter_params: FilterParams = FilterParams()
    sweep: SweepSettings | None = None
    config_text: str = ""

    def __post_init__(self):
        if self.n_scenes < 0:
            raise ConfigError("n_scenes must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.sparsify_mode not in ("bernoulli", "mask"):
            raise ConfigError(f"unknown sparsify mode {self.sparsify_mode!r}")
        if self.sparsify_mode == "mask" and self.mask_dir is None:
            raise ConfigError("sparsify mode 'mask' needs a mask_dir")


_SECTION_KEYS = {
    "run": {"calib", "out_dir", "seed", "n_scenes", "workers", "target", "tol"},
    "scene": {"n_occluders", "occluder_depth", "background_depth", "extent",
              "lateral", "vertical"},
    "sparsify": {"mode", "p", "mask_dir"},
    "filter": {"window", "thickness"},
    "sweep": {"window_grid", "thickness_grid", "max_drop", "slack"},
}


def load_pipeline_config(path) -> PipelineConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    blocks = kvconfig.parse_blocks(text, source=str(path))
    src = str(path)
    by_section: dict = {}
    for block in blocks:
        section = kvconfig.require(block, "section", src)
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{src}: unknown section {section!r}")
        if section in by_section:
            raise ConfigError(f"{src}: duplicate section {section!r}")
        extra = set(block) - _SECTION_KEYS[section] - {"section"}
        if extra:
            raise ConfigError(f"{src}: unknown keys in section {section!r}: {sorted(extra)}")
        by_section[section] = block
    if "run" not in by_section:
        raise ConfigError(f"{src}: missing 'run' section")

    run = by_section["run"]
    base = path.parent
    calib = base / kvconfig.require(run, "calib", src)
    out_dir = base / kvconfig.require(run, "out_dir", src)

    scene_cfg = SceneGenConfig()
    if "scene" in by_section:
        s = by_section["scene"]
        kwargs = {}
        if "n_occluders" in s:
            kwargs["n_occluders"] = kvconfig.ints(s, "n_occluders", 1, src)[0]
        for key in ("occluder_depth", "background_depth", "extent", "lateral", "vertical"):
            if key in s:
                kwargs[key] = tuple(kvconfig.floats(s, key, 2, src))
        scene_cfg = SceneGenConfig(**kwargs)

    mode, p, mask_dir = "bernoulli", 0.1, None
    if "sparsify" in by_section:
        s = by_section["sparsify"]
        mode = s.get("mode", "bernoulli")
        if "p" in s:
            p = kvconfig.floats(s, "p", 1, src)[0]
        if "mask_dir" in s:
            mask_dir = base / s["mask_dir"]

    fparams = FilterParams()
    if "filter" in by_section:
        s = by_section["filter"]
        fparams = FilterParams(
            window=kvconfig.ints(s, "window", 1, src)[0] if "window" in s else 16,
            thickness=kvconfig.floats(s, "thickness", 1, src)[0] if "thickness" in s else 0.5,
        )

    sweep = None
    if "sweep" in by_section:
        s = by_section["sweep"]
        sweep = SweepSettings(
            window_grid=tuple(int(t) for t in s["window_grid"].split())
            if "window_grid" in s else DEFAULT_WP_GRID,
            thickness_grid=tuple(float(t) for t in s["thickness_grid"].split())
            if "thickness_grid" in s else DEFAULT_THETA_GRID,
            max_drop=kvconfig.floats(s, "max_drop", 1, src)[0] if "max_drop" in s else DEFAULT_MAX_DROP,
            slack=kvconfig.floats(s, "slack", 1, src)[0] if "slack" in s else DEFAULT_SLACK,
        )

    return PipelineConfig(
        calib_path=calib,
        out_dir=out_dir,
        seed=kvconfig.ints(run, "seed", 1, src)[0] if "seed" in run else 0,
        n_scenes=kvconfig.ints(run, "n_scenes", 1, src)[0] if "n_scenes" in run else 1,
        workers=kvconfig.ints(run, "workers", 1, src)[0] if "workers" in run else 1,
        target=run.get("target", "random"),
        tol=kvconfig.floats(run, "tol", 1, src)[0] if "tol" in run else DEFAULT_NOISE_TOL,
        scene=scene_cfg,
        sparsify_mode=mode,
        keep_probability=p,
        mask_dir=mask_dir,
        filter_params=fparams,
        sweep=sweep,
        config_text=text,
    )


def derive_seed(global_seed: int, stage: str, index: int) -> int:
    """Stable 63-bit seed from (global seed, stage name, scene index)."""
    digest = hashlib.sha256(f"{global_seed}/{stage}/{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _SceneWriter:
    """Collects outputs as .partial files; commit renames them atomically."""

    def __init__(self, out_dir: Path, scene_dir: str):
        self.root = out_dir
        self.dir = out_dir / scene_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.pending: list = []

    def path(self, name: str) -> Path:
        partial = self.dir / (name + ".partial")
        self.pending.append((partial, self.dir / name))
        return partial

    def commit(self) -> dict:
        hashes = {}
        for partial, final in self.pending:
            os.replace(partial, final)
            hashes[str(final.relative_to(self.root))] = _sha256(final)
        self.pending.clear()
        return hashes


def _effective_workers(cfg: PipelineConfig) -> int:
    workers = cfg.workers
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def _scene_task(cfg, rig, bank, index, stop_after_project=False):
    seeds = {
        "scene": derive_seed(cfg.seed, "scene", index),
        "sparsify": derive_seed(cfg.seed, "sparsify", index),
        "target": derive_seed(cfg.seed, "target", index),
    }
    writer = _SceneWriter(cfg.out_dir, f"scene_{index:04d}")
    timings: dict = {}
    report: dict = {"index": index}
    stage = "scene"
    try:
        t0 = time.perf_counter()
        scene = generate_scene(dataclasses.replace(cfg.scene, seed=seeds["scene"]))
        save_scene(scene, writer.path("scene.txt"))
        timings[stage] = time.perf_counter() - t0

        stage = "render"
        t0 = time.perf_counter()
        lidar_truth = render_depth(scene, RigidTransform.identity(), rig.lidar)
        timings[stage] = time.perf_counter() - t0

        stage = "sparsify"
        t0 = time.perf_counter()
        if cfg.sparsify_mode == "bernoulli":
            masked = sparsify_bernoulli(
                lidar_truth, BernoulliConfig(cfg.keep_probability, seeds["sparsify"]))
            report["mask_id"] = None
        else:
            masked, mask_id = sparsify_with_mask(lidar_truth, bank,
                                                 draw_index=seeds["sparsify"])
            report["mask_id"] = mask_id
        write_depth_png(masked, writer.path("masked.png"))
        timings[stage] = time.perf_counter() - t0

        stage = "target"
        if cfg.target == "random":
            target = random_target_camera(rig, seeds["target"])
        else:
            target = cfg.target
        cam = rig.camera(target)
        report["target"] = target

        stage = "project"
        t0 = time.perf_counter()
        result = project_to_rig_camera(masked, rig, target)
        truth = render_depth(scene, cam.from_lidar, cam.intrinsics)
        write_depth_png(result.projected, writer.path("projected.png"))
        write_depth_png(truth, writer.path("truth.png"))
        report["projection"] = result.stats.as_dict()
        timings[stage] = time.perf_counter() - t0

        if stop_after_project:
            outputs = writer.commit()
            return {"index": index, "seeds": seeds, "outputs": outputs,
                    "timings_s": timings, "report": report,
                    "_mem": (result.projected, truth, writer)}

        stage = "filter"
        t0 = time.perf_counter()
        _filter_and_report(cfg, writer, report, result.projected, truth,
                           cfg.filter_params)
        timings[stage] = time.perf_counter() - t0

        outputs = writer.commit()
        return {"index": index, "seeds": seeds, "outputs": outputs,
                "timings_s": timings, "report": report}
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, index, exc) from exc


def _filter_and_report(cfg, writer, report, projected, truth, params):
    rps = filter_reliable(projected, params)
    write_depth_png(rps.kept, writer.path("kept.png"))
    report["filter"] = {"window": params.window, "thickness": params.thickness}
    try:
        report["noise_raw"] = noise_rate(projected, truth, cfg.tol).as_dict()
        report["noise_filtered"] = noise_rate(rps, truth, cfg.tol).as_dict()
    except EmptyInputError:
        report["noise_raw"] = report["noise_filtered"] = None
    try:
        report["metrics_projected"] = compute_metrics(projected.to_dense(), truth).as_dict()
    except EmptyInputError:
        report["metrics_projected"] = None
    with open(writer.path("report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run all scenes; returns the manifest dict (also written to disk)."""
    rig = load_calibration(cfg.calib_path)
    if cfg.target not in ("random",) and cfg.target not in rig.names:
        raise ConfigError(f"target {cfg.target!r} not in rig cameras {rig.names}")
    bank = None
    if cfg.sparsify_mode == "mask":
        bank = MaskBank.from_dir(cfg.mask_dir, seed=derive_seed(cfg.seed, "bank", 0))
        if (bank.width, bank.height) != (rig.lidar.width, rig.lidar.height):
            raise ConfigError("mask bank dimensions do not match the lidar camera")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    two_phase = cfg.sweep is not None
    workers = _effective_workers(cfg)
    if cfg.n_scenes == 0:
        records = []
    elif workers == 1:
        records = [_scene_task(cfg, rig, bank, i, two_phase) for i in range(cfg.n_scenes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(
                lambda i: _scene_task(cfg, rig, bank, i, two_phase),
                range(cfg.n_scenes)))

    sweep_section = None
    if two_phase and records:
        corpus = [(r["_mem"][0], r["_mem"][1]) for r in records]
        result = sweep_params(corpus, cfg.sweep.window_grid, cfg.sweep.thickness_grid,
                              tol=cfg.tol, max_drop=cfg.sweep.max_drop,
                              slack=cfg.sweep.slack)
        sweep_section = {
            "selected": {"window": result.params.window,
                         "thickness": result.params.thickness},
            "curves": result.curves_dict(),
            "notes": list(result.notes),
        }
        for r in records:
            projected, truth, writer = r.pop("_mem")
            _filter_and_report(cfg, writer, r["report"], projected, truth,
                               result.params)
            r["outputs"].update(writer.commit())

    run_outputs = {}
    if sweep_section is not None:
        with open(cfg.out_dir / "sweep.json", "w", encoding="utf-8") as fh:
            json.dump(sweep_section, fh, sort_keys=True, indent=1)
        run_outputs["sweep.json"] = _sha256(cfg.out_dir / "sweep.json")

    manifest = {
        "tool": "depthproj",
        "global_seed": cfg.seed,
        "n_scenes": cfg.n_scenes,
        "config_text": cfg.config_text,
        "scenes": sorted(records, key=lambda r: r["index"]),
        "outputs": run_outputs,
        "sweep": sweep_section,
    }
    with open(cfg.out_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
    return manifest


@dataclass(frozen=True)
class DiffReport:
    differing: tuple
    missing_in_a: tuple
    missing_in_b: tuple
    missing_on_disk: tuple

    @property
    def clean(self) -> bool:
        return not (self.differing or self.missing_in_a
                    or self.missing_in_b or self.missing_on_disk)


def _manifest_outputs(manifest: dict) -> dict:
    outputs = dict(manifest.get("outputs", {}))
    for scene in manifest.get("scenes", []):
        outputs.update(scene.get("outputs", {}))
    return outputs


def compare_runs(manifest_a, manifest_b) -> DiffReport:
    """Compare two manifests by recorded output hashes and disk presence."""
    pa, pb = Path(manifest_a), Path(manifest_b)
    with open(pa, encoding="utf-8") as fh:
        ma = json.load(fh)
    with open(pb, encoding="utf-8") as fh:
        mb = json.load(fh)
    oa, ob = _manifest_outputs(ma), _manifest_outputs(mb)
    differing = sorted(k for k in oa.keys() & ob.keys() if oa[k] != ob[k])
    missing_in_b = sorted(oa.keys() - ob.keys())
    missing_in_a = sorted(ob.keys() - oa.keys())
    gone = []
    for base, outputs in ((pa.parent, oa), (pb.parent, ob)):
        for rel in outputs:
            if not (base / rel).exists():
                gone.append(str(base / rel))
    return DiffReport(differing=tuple(differing),
                      missing_in_a=tuple(missing_in_a),
                      missing_in_b=tuple(missing_in_b),
                      missing_on_disk=tuple(sorted(gone)))
