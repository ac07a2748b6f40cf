"""Stage implementations behind the CLI subcommands.

Stages communicate through files in documented formats; each writes a
manifest with content hashes of everything it read and produced.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from ..core.camera import Camera, look_at_camera
from ..core.mesh import Mesh
from ..core.skeleton import JointLayout, Skeleton2D, triangulate_skeleton
from ..errors import InputError
from ..ibr.synthesis import SourceView, decode, synthesize_view
from ..io.images import read_png, write_png
from ..io.meshio import read_mesh, write_mesh
from ..io.pfm import write_pfm
from ..io.rigs import (
    read_calibration,
    read_skeleton2d,
    read_skeleton3d,
    write_calibration,
    write_kinematic_params,
    write_skeleton2d,
    write_skeleton3d,
    write_skinning_weights,
)
from ..metrics.image import psnr, ssim
from ..metrics.surface import chamfer, p2s
from ..recon.features import FeatureMap, rgb_provider
from ..recon.fusion import TransformerWeights
from ..recon.heads import MlpHead, SignedDistanceHead, mesh_sdf, sphere_sdf
from ..recon.pipeline import reconstruct
from ..raster.render import render_attributes, render_depth
from ..tracking.sequence import select_canonical_frame, track_sequence
from .config import PipelineConfig
from .manifest import hash_files, read_manifest, write_manifest
from .scene import SyntheticScene


def _frame_name(f: int) -> str:
    return f"f{f:03d}"


def _scene_meta_path(config: PipelineConfig) -> Path:
    return config.scene_dir / "scene.json"


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise InputError(f"missing {hint}: expected file {path}")
    return path


def _load_scene_meta(config: PipelineConfig) -> dict:
    with open(_require(_scene_meta_path(config), "scene description (run gen-scene first)")) as fh:
        return json.load(fh)


def run_gen_scene(config: PipelineConfig) -> dict:
    started = time.perf_counter()
    scene_cfg = dict(config.raw["scene"])
    scene_cfg.pop("dir")
    scene = SyntheticScene(seed=config.seed, **scene_cfg)
    data = scene.build()

    root = config.scene_dir
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "depth").mkdir(exist_ok=True)
    (root / "skeleton2d").mkdir(exist_ok=True)
    (root / "skeleton3d").mkdir(exist_ok=True)
    (root / "poses").mkdir(exist_ok=True)

    outputs = []
    write_calibration(root / "calibration.json", data.cameras)
    outputs.append(root / "calibration.json")

    for f, (mesh, skeleton) in enumerate(zip(data.meshes, data.skeletons)):
        tag = _frame_name(f)
        mesh_path = root / f"mesh_{tag}.obj"
        write_mesh(mesh_path, mesh)
        outputs.append(mesh_path)
        write_skeleton3d(root / "skeleton3d" / f"{tag}.json", skeleton)
        outputs.append(root / "skeleton3d" / f"{tag}.json")
        with open(root / "poses" / f"{tag}.json", "w") as fh:
            json.dump({"theta": data.poses[f].tolist()}, fh, indent=2)
        outputs.append(root / "poses" / f"{tag}.json")
        for cam in data.cameras:
            image = render_attributes(mesh, cam, "color")
            depth = render_depth(mesh, cam)
            png = root / "images" / f"{tag}_{cam.name}.png"
            pfm = root / "depth" / f"{tag}_{cam.name}.pfm"
            write_png(png, np.clip(image.values, 0.0, 1.0))
            write_pfm(pfm, depth.values)
            outputs += [png, pfm]
            joints = np.stack([cam.project(j)[0] for j in skeleton.joints])
            sk2d = Skeleton2D(positions=joints, confidence=np.ones(len(joints)))
            sk_path = root / "skeleton2d" / f"{tag}_{cam.name}.json"
            write_skeleton2d(sk_path, sk2d)
            outputs.append(sk_path)

    meta = {
        "frames": len(data.meshes),
        "parents": list(data.parents),
        "layout": {
            "names": list(data.layout.names),
            "parents": list(data.layout.parents),
            "hip": data.layout.hip,
            "neck": data.layout.neck,
        },
        "cameras": [cam.name for cam in data.cameras],
        "scene": config.raw["scene"],
    }
    with open(_scene_meta_path(config), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(_scene_meta_path(config))

    write_manifest(
        root / "manifest.json",
        "gen-scene",
        config.raw,
        inputs={},
        outputs=hash_files(outputs),
        timings={"total_s": time.perf_counter() - started},
    )
    return meta


def _build_head(config: PipelineConfig, frame: int):
    recon_cfg = config.raw["recon"]
    if recon_cfg["head"] == "sphere-oracle":
        return SignedDistanceHead(
            sphere_sdf(radius=recon_cfg["head_radius"]), width=recon_cfg["head_width"]
        )
    if recon_cfg["head"] == "mesh-oracle":
        gt_path = _require(
            config.scene_dir / f"mesh_{_frame_name(frame)}.obj", "scene mesh for the oracle head"
        )
        return SignedDistanceHead(mesh_sdf(read_mesh(gt_path)), width=recon_cfg["head_width"])
    return MlpHead.random(recon_cfg["embed_dim"] + 1, seed=config.seed)


def _load_views(config: PipelineConfig, meta: dict, frame: int):
    root = config.scene_dir
    cameras = read_calibration(_require(root / "calibration.json", "calibration"))
    tag = _frame_name(frame)
    images, skeletons2d = [], []
    inputs = [root / "calibration.json"]
    for cam in cameras:
        png = _require(root / "images" / f"{tag}_{cam.name}.png", f"frame {frame} image")
        images.append(read_png(png))
        sk = _require(root / "skeleton2d" / f"{tag}_{cam.name}.json", f"frame {frame} 2D skeleton")
        skeletons2d.append(read_skeleton2d(sk))
        inputs += [png, sk]
    return cameras, images, skeletons2d, inputs


def run_reconstruct(config: PipelineConfig) -> dict:
    started = time.perf_counter()
    meta = _load_scene_meta(config)
    recon_cfg = config.raw["recon"]
    out_root = config.stage_dir("recon")
    (out_root / "skeleton3d").mkdir(parents=True, exist_ok=True)

    feature_dim = 3 + (1 if recon_cfg["z_mode"] == "append" else 0)
    weights = TransformerWeights.random(
        feature_dim, recon_cfg["embed_dim"], seed=recon_cfg["weights_seed"]
    )
    bounds = recon_cfg["bounds"]
    if bounds is not None:
        bounds = (np.asarray(bounds[0], dtype=float), np.asarray(bounds[1], dtype=float))

    layout = JointLayout(
        names=tuple(meta["layout"]["names"]),
        parents=tuple(meta["layout"]["parents"]),
        hip=meta["layout"]["hip"],
        neck=meta["layout"]["neck"],
    )

    inputs, outputs = [], []
    per_frame = {}
    for frame in range(meta["frames"]):
        head = _build_head(config, frame)
        cameras, images, skeletons2d, frame_inputs = _load_views(config, meta, frame)
        inputs += frame_inputs
        skeleton = triangulate_skeleton(
            list(zip(cameras, skeletons2d)),
            confidence_floor=recon_cfg["confidence_floor"],
            layout=layout,
        )
        mesh = reconstruct(
            images,
            cameras,
            skeletons2d,
            weights,
            head,
            bounds=bounds,
            resolution=tuple(recon_cfg["resolution"]),
            provider=rgb_provider,
            z_mode=recon_cfg["z_mode"],
            threshold=recon_cfg["threshold"],
            confidence_floor=recon_cfg["confidence_floor"],
            layout=layout,
            threads=config.threads,
        )
        tag = _frame_name(frame)
        mesh_path = out_root / f"mesh_{tag}.{recon_cfg['mesh_format']}"
        write_mesh(mesh_path, mesh)
        skel_path = out_root / "skeleton3d" / f"{tag}.json"
        write_skeleton3d(skel_path, skeleton)
        outputs += [mesh_path, skel_path]
        per_frame[tag] = {"vertices": mesh.num_vertices, "triangles": mesh.num_triangles}

    write_manifest(
        out_root / "manifest.json",
        "reconstruct",
        config.raw,
        inputs=hash_files(inputs),
        outputs=hash_files(outputs),
        timings={"total_s": time.perf_counter() - started},
        extra={"frames": per_frame},
    )
    return per_frame


def run_track(config: PipelineConfig) -> dict:
    started = time.perf_counter()
    meta = _load_scene_meta(config)
    track_cfg = config.raw["tracking"]
    solver = config.raw["solver"]
    recon_root = config.stage_dir("recon")
    out_root = config.stage_dir("track")
    (out_root / "params").mkdir(parents=True, exist_ok=True)

    meshes, skeletons, inputs = [], [], []
    fmt = config.raw["recon"]["mesh_format"]
    for frame in range(meta["frames"]):
        tag = _frame_name(frame)
        mesh_path = _require(recon_root / f"mesh_{tag}.{fmt}", "reconstructed mesh (run reconstruct first)")
        skel_path = _require(recon_root / "skeleton3d" / f"{tag}.json", "frame skeleton")
        meshes.append(read_mesh(mesh_path))
        skeletons.append(read_skeleton3d(skel_path))
        inputs += [mesh_path, skel_path]

    canonical = track_cfg["canonical_frame"]
    if canonical is None:
        canonical = select_canonical_frame(skeletons)
    result = track_sequence(
        canonical,
        meshes,
        skeletons,
        parents=meta["parents"],
        reg_lambda=track_cfg["reg_lambda"],
        point_to=track_cfg["point_to"],
        max_iters=solver["max_iters"],
        damping=solver["damping"],
        tol=solver["tol"],
    )

    outputs = []
    weights_path = out_root / "weights.json"
    write_skinning_weights(weights_path, result.weights.entries)
    outputs.append(weights_path)
    per_frame = {}
    for frame, tracked in enumerate(result.frames):
        tag = _frame_name(frame)
        mesh_path = out_root / f"mesh_{tag}.{fmt}"
        write_mesh(mesh_path, tracked.mesh)
        params_path = out_root / "params" / f"{tag}.json"
        write_kinematic_params(params_path, tracked.params.theta, tracked.params.root_translation)
        outputs += [mesh_path, params_path]
        per_frame[tag] = {
            "mean_distance_m": tracked.mean_distance,
            "warning": tracked.warning,
        }

    write_manifest(
        out_root / "manifest.json",
        "track",
        config.raw,
        inputs=hash_files(inputs),
        outputs=hash_files(outputs),
        timings={"total_s": time.perf_counter() - started},
        extra={"canonical_frame": canonical, "frames": per_frame},
    )
    return per_frame


def _novel_camera(config: PipelineConfig, cameras: list[Camera]) -> Camera:
    novel_cfg = config.raw["render"]["novel"]
    if "camera" in novel_cfg:
        for cam in cameras:
            if cam.name == novel_cfg["camera"]:
                return cam
        raise InputError(f"render.novel.camera {novel_cfg['camera']!r} not in the calibration")
    scene_cfg = config.raw["scene"]
    yaw = np.radians(novel_cfg.get("yaw_deg", 30.0))
    pitch = np.radians(novel_cfg.get("pitch_deg", 0.0))
    radius = novel_cfg.get("radius", scene_cfg["ring_radius"])
    eye = radius * np.array(
        [np.sin(yaw) * np.cos(pitch), np.sin(pitch), np.cos(yaw) * np.cos(pitch)]
    )
    return look_at_camera(
        eye,
        (0.0, 0.0, 0.0),
        scene_cfg["width"],
        scene_cfg["height"],
        fov_deg=scene_cfg["fov_deg"],
        name="novel",
    )


def _geometry_for_frame(config: PipelineConfig, frame: int) -> tuple[Mesh, Path]:
    """Pick the render geometry: tracked mesh, else reconstructed mesh.

    ``render.geometry`` may instead name the ground-truth scene mesh
    ("scene", for render-stage tests where depth maps and source images
    must come from one surface) or an explicit mesh file.
    """
    choice = config.raw["render"]["geometry"]
    tag = _frame_name(frame)
    if choice == "scene":
        path = _require(config.scene_dir / f"mesh_{tag}.obj", "scene mesh (run gen-scene first)")
        return read_mesh(path), path
    if choice != "auto":
        return read_mesh(_require(Path(choice), "render geometry mesh")), Path(choice)
    fmt = config.raw["recon"]["mesh_format"]
    tracked = config.stage_dir("track") / f"mesh_{tag}.{fmt}"
    if tracked.exists():
        return read_mesh(tracked), tracked
    recon = config.stage_dir("recon") / f"mesh_{tag}.{fmt}"
    if recon.exists():
        return read_mesh(recon), recon
    raise InputError(
        f"no geometry for frame {frame}: expected {tracked} or {recon} (run reconstruct/track)"
    )


def run_render(config: PipelineConfig) -> dict:
    started = time.perf_counter()
    meta = _load_scene_meta(config)
    frame = int(config.raw["render"]["frame"])
    geometry, geometry_path = _geometry_for_frame(config, frame)
    root = config.scene_dir
    cameras = read_calibration(_require(root / "calibration.json", "calibration"))
    tag = _frame_name(frame)

    sources, inputs = [], [root / "calibration.json", geometry_path]
    for cam in cameras:
        png = _require(root / "images" / f"{tag}_{cam.name}.png", f"frame {frame} image")
        inputs.append(png)
        sources.append(SourceView(cam, FeatureMap(read_png(png).astype(float) / 255.0)))

    novel = _novel_camera(config, cameras)
    output = synthesize_view(
        sources, geometry, novel, rel_threshold=config.raw["render"]["rel_threshold"]
    )
    image = decode(output, background=tuple(config.raw["render"]["background"]))

    out_root = config.stage_dir("render")
    out_root.mkdir(parents=True, exist_ok=True)
    novel_png = out_root / "novel.png"
    holes_png = out_root / "holes.png"
    vis_pfm = out_root / "viscount.pfm"
    write_png(novel_png, image)
    write_png(holes_png, output.hole_mask.astype(float))
    write_pfm(vis_pfm, output.visibility_count.astype(np.float32))
    outputs = [novel_png, holes_png, vis_pfm]

    extra = {
        "frame": frame,
        "novel_camera": novel.name,
        "hole_fraction": float(output.hole_mask.mean()),
        "geometry": str(geometry_path),
    }
    write_manifest(
        out_root / "manifest.json",
        "render",
        config.raw,
        inputs=hash_files(inputs),
        outputs=hash_files(outputs),
        timings={"total_s": time.perf_counter() - started},
        extra=extra,
    )
    return extra


def run_eval(config: PipelineConfig) -> list[dict]:
    started = time.perf_counter()
    meta = _load_scene_meta(config)
    samples = int(config.raw["eval"]["samples"])
    fmt = config.raw["recon"]["mesh_format"]
    reports: list[dict] = []
    inputs = []

    for frame in range(meta["frames"]):
        tag = _frame_name(frame)
        gt_path = _require(config.scene_dir / f"mesh_{tag}.obj", "ground-truth scene mesh")
        gt = read_mesh(gt_path)
        inputs.append(gt_path)
        for stage in ("recon", "track"):
            candidate = config.stage_dir(stage) / f"mesh_{tag}.{fmt}"
            if not candidate.exists():
                continue
            mesh = read_mesh(candidate)
            inputs.append(candidate)
            params = {"samples": samples, "seed": config.seed, "frame": frame, "stage": stage}
            reports.append(
                {
                    "metric": "chamfer",
                    "value": chamfer(mesh, gt, samples, config.seed),
                    "units": "m",
                    "parameters": params,
                }
            )
            reports.append(
                {
                    "metric": "p2s",
                    "value": p2s(mesh, gt, samples, config.seed),
                    "units": "m",
                    "parameters": params,
                }
            )

    render_manifest = config.stage_dir("render") / "manifest.json"
    if render_manifest.exists():
        render_info = read_manifest(render_manifest)["extra"]
        frame = render_info["frame"]
        gt_mesh = read_mesh(config.scene_dir / f"mesh_{_frame_name(frame)}.obj")
        cameras = read_calibration(config.scene_dir / "calibration.json")
        novel = _novel_camera(config, cameras)
        gt_render = render_attributes(gt_mesh, novel, "color")
        novel_png = config.stage_dir("render") / "novel.png"
        holes_png = config.stage_dir("render") / "holes.png"
        inputs += [novel_png, holes_png]
        image = read_png(novel_png).astype(float) / 255.0
        holes = read_png(holes_png)[:, :, 0] > 127
        mask = gt_render.mask & ~holes
        gt_image = np.clip(gt_render.values, 0.0, 1.0)
        gt_image[~gt_render.mask] = config.raw["render"]["background"]
        params = {"frame": frame, "novel_camera": novel.name, "masked": True}
        reports.append(
            {
                "metric": "psnr",
                "value": psnr(image, gt_image, mask),
                "units": "dB",
                "parameters": params,
            }
        )
        reports.append(
            {
                "metric": "ssim",
                "value": ssim(image, gt_image),
                "units": "",
                "parameters": {"frame": frame, "novel_camera": novel.name, "masked": False},
            }
        )
    # Perceptual similarity needs a pretrained network; the slot stays null.
    reports.append({"metric": "lpips", "value": None, "units": "", "parameters": {}})

    for report in reports:
        value = report.get("value")
        report["infinite"] = bool(value is not None and not np.isfinite(value))
        if report["infinite"]:
            report["value"] = None

    out_root = config.stage_dir("eval")
    out_root.mkdir(parents=True, exist_ok=True)
    reports_path = out_root / "reports.json"
    with open(reports_path, "w") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
        fh.write("\n")

    write_manifest(
        out_root / "manifest.json",
        "eval",
        config.raw,
        inputs=hash_files(inputs),
        outputs=hash_files([reports_path]),
        timings={"total_s": time.perf_counter() - started},
    )
    return reports


def run_all(config: PipelineConfig) -> list[dict]:
    run_gen_scene(config)
    run_reconstruct(config)
    meta = _load_scene_meta(config)
    if meta["frames"] > 1:
        run_track(config)
    run_render(config)
    return run_eval(config)
