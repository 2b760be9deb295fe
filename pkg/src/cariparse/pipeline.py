"""End-to-end orchestration: prepare, adapt, synthesize, train, evaluate.

A single INI config drives a run. Paths inside it resolve relative to the
config file's directory, and every stage writes under one workspace that a
lock file guards. Synthesis manifests carry relative paths plus content
hashes of both their own outputs and the checkpoints that produced them, so
evaluation can refuse stale or tampered artifacts. All stages are pure
functions of (config, seed, datasets); artifacts contain no timestamps or
absolute paths, which makes double runs checksum-comparable.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import os
import shutil
import statistics
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import metrics
from .datasets import (
    ShapeSet,
    StyleReferenceSet,
    cluster_shapes,
    cluster_styles,
    default_grouping,
    generate_toy_face_dataset,
    grouping_sha256,
    load_caricature_dataset,
    load_grouping,
    load_photo_dataset,
    rasterize_landmark_map,
    save_grouping,
    write_image_png,
    write_label_png,
)
from .parsing import ParseTrainConfig, build_parsing_network, predict, train_parser
from .perceptual import random_extractor
from .shape_adapt import (
    ShapeTrainConfig,
    apply_shape_adaptation,
    build_shape_generator,
    train_shape_adaptation,
)
from .texture_adapt import (
    TextureTrainConfig,
    apply_texture,
    build_texture_network,
    train_texture_network,
)
from .utils import (
    derive_seed,
    param_fingerprint,
    sha256_bytes,
    sha256_file,
    stable_json_dumps,
    tree_fingerprint,
)

SYNTH_ARMS = ("shape", "texture", "both")
PARSER_ARMS = ("source", "texture", "shape", "both")
ARM_LABELS = {"source": "source-only", "texture": "texture", "shape": "shape", "both": "both"}


class StageDependencyError(RuntimeError):
    """A stage was invoked before the checkpoints it needs exist."""


class ProvenanceError(RuntimeError):
    """Workspace artifacts do not match the checksums recorded for them."""


@dataclass
class PipelineConfig:
    photo_root: Path
    cari_root: Path
    eval_root: Path
    grouping_file: Path
    workspace: Path
    seed: int = 0
    k: int = 4
    m: int = 3
    image_size: int = 64
    toy_n_photo: int = 64
    toy_n_cari: int = 64
    toy_n_eval: int = 32
    extractor_seed: int = 0
    extractor_widths: tuple = (8, 16, 24, 32)
    shape: ShapeTrainConfig = None
    texture: TextureTrainConfig = None
    parser: ParseTrainConfig = None
    config_sha: str = ""

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be >= 1")


def _coerce_section(section, dc_default):
    """Fill a dataclass from an INI section, typed by the field defaults."""
    kwargs = {}
    for f in dataclasses.fields(dc_default):
        if f.name not in section:
            continue
        default = getattr(dc_default, f.name)
        raw = section[f.name]
        if isinstance(default, bool):
            kwargs[f.name] = section.getboolean(f.name)
        elif isinstance(default, int):
            kwargs[f.name] = int(raw)
        elif isinstance(default, float):
            kwargs[f.name] = float(raw)
        elif isinstance(default, tuple):
            elem = type(default[0])
            parts = [elem(p) for p in raw.replace(",", " ").split()]
            kwargs[f.name] = tuple(parts * 2 if len(parts) == 1 and len(default) == 2 else parts)
        else:
            kwargs[f.name] = raw
    return dataclasses.replace(dc_default, **kwargs)


def load_pipeline_config(
    path, seed_override: int | None = None, workspace_override=None
) -> PipelineConfig:
    """Parse an INI run config; relative paths resolve against the file."""
    path = Path(path)
    text = path.read_text()
    cp = configparser.ConfigParser()
    cp.read_string(text)
    base = path.parent
    p = cp["pipeline"]

    def _path(key):
        return (base / p[key]).resolve()

    seed = seed_override if seed_override is not None else p.getint("seed", 0)
    workspace = Path(workspace_override).resolve() if workspace_override else _path("workspace")

    shape = _coerce_section(cp["shape"] if "shape" in cp else {}, ShapeTrainConfig())
    texture = _coerce_section(cp["texture"] if "texture" in cp else {}, TextureTrainConfig())
    parser = _coerce_section(cp["parser"] if "parser" in cp else {}, ParseTrainConfig())
    k = p.getint("k", 4)
    m = p.getint("m", 3)
    shape = dataclasses.replace(shape, k=k, seed=derive_seed(seed, "shape"))
    texture = dataclasses.replace(texture, m=m, seed=derive_seed(seed, "texture"))
    parser = dataclasses.replace(parser, seed=derive_seed(seed, "parser"))

    ex = cp["extractor"] if "extractor" in cp else {}
    widths = tuple(
        int(x) for x in ex.get("widths", "8,16,24,32").replace(",", " ").split()
    )
    toy = cp["toy"] if "toy" in cp else {}

    config_sha = sha256_bytes(f"{text}\nseed={seed}".encode())
    return PipelineConfig(
        photo_root=_path("photo_root"),
        cari_root=_path("cari_root"),
        eval_root=_path("eval_root"),
        grouping_file=_path("grouping"),
        workspace=workspace,
        seed=seed,
        k=k,
        m=m,
        image_size=p.getint("image_size", 64),
        toy_n_photo=int(toy.get("n_photo", 64)),
        toy_n_cari=int(toy.get("n_cari", 64)),
        toy_n_eval=int(toy.get("n_eval", 32)),
        extractor_seed=int(ex.get("seed", 0)),
        extractor_widths=widths,
        shape=shape,
        texture=texture,
        parser=parser,
        config_sha=config_sha,
    )


@contextmanager
def workspace_lock(workspace: Path):
    workspace.mkdir(parents=True, exist_ok=True)
    lock = workspace / ".lock"
    if lock.exists():
        raise RuntimeError(f"workspace {workspace} is locked by pid {lock.read_text().strip()}")
    lock.write_text(str(os.getpid()))
    try:
        yield
    finally:
        lock.unlink(missing_ok=True)


def _paths(cfg: PipelineConfig) -> dict:
    ws = cfg.workspace
    return {
        "clusters": ws / "clusters",
        "checkpoints": ws / "checkpoints",
        "logs": ws / "logs",
        "synth": ws / "synth",
        "eval": ws / "eval",
        "preview": ws / "preview",
    }


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _extractor(cfg: PipelineConfig):
    return random_extractor(cfg.extractor_seed, cfg.extractor_widths)


# stage commands


def cmd_make_toy_data(cfg: PipelineConfig) -> None:
    """Generate the toy photo/caricature/eval roots and default grouping."""
    generate_toy_face_dataset(
        cfg.photo_root, cfg.toy_n_photo, "photo", derive_seed(cfg.seed, "toy-photo"), cfg.image_size
    )
    generate_toy_face_dataset(
        cfg.cari_root, cfg.toy_n_cari, "caricature", derive_seed(cfg.seed, "toy-cari"), cfg.image_size
    )
    generate_toy_face_dataset(
        cfg.eval_root,
        cfg.toy_n_eval,
        "caricature",
        derive_seed(cfg.seed, "toy-eval"),
        cfg.image_size,
        with_labels=True,
    )
    if not cfg.grouping_file.exists():
        cfg.grouping_file.parent.mkdir(parents=True, exist_ok=True)
        save_grouping(default_grouping(), cfg.grouping_file)
    print(
        f"[make-toy-data] photo={cfg.toy_n_photo} cari={cfg.toy_n_cari} "
        f"eval={cfg.toy_n_eval} size={cfg.image_size}"
    )


def cmd_prepare(cfg: PipelineConfig) -> tuple[ShapeSet, StyleReferenceSet]:
    """Cluster caricature landmarks into the shape set and styles into refs."""
    caris = load_caricature_dataset(cfg.cari_root)
    if len(caris) < cfg.k:
        raise ValueError(f"k={cfg.k} exceeds caricature dataset size {len(caris)}")
    if len(caris) < cfg.m:
        raise ValueError(f"m={cfg.m} exceeds caricature dataset size {len(caris)}")
    with workspace_lock(cfg.workspace):
        shapes = cluster_shapes(
            [c.landmarks for c in caris], cfg.k, derive_seed(cfg.seed, "cluster-shapes")
        )
        refs = cluster_styles([c.image for c in caris], _extractor(cfg), cfg.m)
        d = _paths(cfg)["clusters"]
        d.mkdir(parents=True, exist_ok=True)
        np.savez(d / "shape_set.npz", centers=shapes.centers)
        np.savez(
            d / "style_refs.npz",
            indices=refs.indices,
            images=np.stack([np.asarray(r, dtype=np.float32) for r in refs.references]),
        )
        diag = {
            "k": cfg.k,
            "m": cfg.m,
            "style_reference_indices": [int(i) for i in refs.indices],
            "shape_center_spread": float(np.std(shapes.centers)),
        }
        (d / "diagnostics.json").write_text(stable_json_dumps(diag))
    print(f"[prepare] {cfg.k} shape centers, {cfg.m} style references")
    return shapes, refs


def _load_clusters(cfg: PipelineConfig) -> tuple[ShapeSet, StyleReferenceSet]:
    d = _paths(cfg)["clusters"]
    if not (d / "shape_set.npz").exists():
        raise StageDependencyError("prepare: cluster artifacts missing, run prepare first")
    shapes = ShapeSet(np.load(d / "shape_set.npz")["centers"])
    data = np.load(d / "style_refs.npz")
    refs = StyleReferenceSet(references=list(data["images"]), indices=data["indices"])
    return shapes, refs


def cmd_train_shape(cfg: PipelineConfig, on_critic_step=None) -> Path:
    """Train the cycle warp generators on photo/caricature landmark maps."""
    shapes, _ = _load_clusters(cfg)
    grouping = load_grouping(cfg.grouping_file)
    photos = load_photo_dataset(cfg.photo_root, cfg.parser.num_classes)
    caris = load_caricature_dataset(cfg.cari_root)
    size = (cfg.image_size, cfg.image_size)
    photo_maps = [rasterize_landmark_map(s.landmarks, grouping, size) for s in photos]
    cari_maps = [rasterize_landmark_map(s.landmarks, grouping, size) for s in caris]
    shape_cfg = dataclasses.replace(cfg.shape, map_channels=grouping.channels, k=cfg.k)
    with workspace_lock(cfg.workspace):
        g_pc, g_cp, log = train_shape_adaptation(
            photo_maps, cari_maps, shapes, shape_cfg, on_critic_step=on_critic_step
        )
        g_pc.grouping_sha = grouping_sha256(grouping)
        p = _paths(cfg)
        p["checkpoints"].mkdir(parents=True, exist_ok=True)
        out = p["checkpoints"] / "shape.pt"
        torch.save(
            {
                "kind": "shape",
                "g_pc": g_pc.state_dict(),
                "g_cp": g_cp.state_dict(),
                "config": dataclasses.asdict(shape_cfg),
                "grouping_sha": g_pc.grouping_sha,
                "fingerprint": param_fingerprint(g_pc.state_dict()),
            },
            out,
        )
        _write_csv(p["logs"] / "shape.csv", log)
    print(f"[train-shape] {shape_cfg.iters} iters, final cycle loss {log[-1]['cycle_loss']:.5f}"
          if log else "[train-shape] 0 iters")
    return out


def load_shape_checkpoint(path):
    blob = torch.load(path, weights_only=True)
    cfg = ShapeTrainConfig(**blob["config"])
    g_pc = build_shape_generator(cfg, "gpc")
    g_pc.load_state_dict(blob["g_pc"])
    g_cp = build_shape_generator(cfg, "gcp")
    g_cp.load_state_dict(blob["g_cp"])
    g_pc.grouping_sha = blob["grouping_sha"]
    g_cp.grouping_sha = blob["grouping_sha"]
    return g_pc, g_cp, blob


def cmd_train_texture(cfg: PipelineConfig) -> Path:
    """Train the stylizer on shape-deformed photos against style references."""
    _, refs = _load_clusters(cfg)
    p = _paths(cfg)
    shape_ckpt = p["checkpoints"] / "shape.pt"
    if not shape_ckpt.exists():
        raise StageDependencyError("train-texture: missing shape checkpoint, run train-shape")
    g_pc, _, _ = load_shape_checkpoint(shape_ckpt)
    grouping = load_grouping(cfg.grouping_file)
    photos = load_photo_dataset(cfg.photo_root, cfg.parser.num_classes)
    rng = np.random.default_rng(derive_seed(cfg.seed, "texture-train-deform"))
    deformed = []
    for s in photos:
        cond = np.zeros(cfg.k, dtype=np.float32)
        cond[rng.integers(0, cfg.k)] = 1.0
        img, _ = apply_shape_adaptation(g_pc, s.image, s.labels, s.landmarks, cond, grouping)
        deformed.append(img)
    tex_cfg = dataclasses.replace(cfg.texture, m=cfg.m)
    extractor = _extractor(cfg)
    with workspace_lock(cfg.workspace):
        net, log = train_texture_network(deformed, refs, extractor, tex_cfg)
        out = p["checkpoints"] / "texture.pt"
        torch.save(
            {
                "kind": "texture",
                "net": net.state_dict(),
                "config": dataclasses.asdict(tex_cfg),
                "extractor_fingerprint": extractor.fingerprint(),
                "fingerprint": param_fingerprint(net.state_dict()),
            },
            out,
        )
        _write_csv(p["logs"] / "texture.csv", log)
    print(f"[train-texture] {tex_cfg.iters} iters, final total loss {log[-1]['total_loss']:.5f}"
          if log else "[train-texture] 0 iters")
    return out


def load_texture_checkpoint(path):
    blob = torch.load(path, weights_only=True)
    cfg = TextureTrainConfig(**blob["config"])
    net = build_texture_network(cfg)
    net.load_state_dict(blob["net"])
    net.eval()
    return net, blob


def cmd_synthesize(cfg: PipelineConfig, arms) -> dict[str, Path]:
    """Build adapted training sets; one record per source photo per arm."""
    for arm in arms:
        if arm not in SYNTH_ARMS:
            raise ValueError(f"unknown synthesis arm {arm!r}; choose from {SYNTH_ARMS}")
    p = _paths(cfg)
    grouping = load_grouping(cfg.grouping_file)
    photos = load_photo_dataset(cfg.photo_root, cfg.parser.num_classes)

    manifests = {}
    with workspace_lock(cfg.workspace):
        for arm in arms:
            need_shape = arm in ("shape", "both")
            need_texture = arm in ("texture", "both")
            g_pc = texture_net = None
            fingerprints = {"shape": None, "texture": None}
            if need_shape:
                ckpt = p["checkpoints"] / "shape.pt"
                if not ckpt.exists():
                    raise StageDependencyError(f"synthesize[{arm}]: missing shape checkpoint")
                g_pc, _, blob = load_shape_checkpoint(ckpt)
                fingerprints["shape"] = blob["fingerprint"]
            if need_texture:
                ckpt = p["checkpoints"] / "texture.pt"
                if not ckpt.exists():
                    raise StageDependencyError(f"synthesize[{arm}]: missing texture checkpoint")
                texture_net, blob = load_texture_checkpoint(ckpt)
                fingerprints["texture"] = blob["fingerprint"]

            rng = np.random.default_rng(derive_seed(cfg.seed, f"synth-{arm}"))
            arm_dir = p["synth"] / arm
            img_dir = arm_dir / "images"
            lbl_dir = arm_dir / "labels"
            img_dir.mkdir(parents=True, exist_ok=True)
            lbl_dir.mkdir(parents=True, exist_ok=True)

            records = []
            previews = []
            for s in photos:
                shape_idx = int(rng.integers(0, cfg.k)) if need_shape else None
                style_idx = int(rng.integers(0, cfg.m)) if need_texture else None
                img, lbl = s.image, s.labels
                if need_shape:
                    cond = np.zeros(cfg.k, dtype=np.float32)
                    cond[shape_idx] = 1.0
                    img, lbl = apply_shape_adaptation(
                        g_pc, img, lbl, s.landmarks, cond, grouping
                    )
                if need_texture:
                    cond = np.zeros(cfg.m, dtype=np.float32)
                    cond[style_idx] = 1.0
                    img = apply_texture(texture_net, img, cond)
                img_path = img_dir / f"{s.name}.png"
                lbl_path = lbl_dir / f"{s.name}.png"
                write_image_png(img, img_path)
                if need_shape:
                    write_label_png(lbl, lbl_path)
                else:
                    # labels untouched by texture: carry source bytes through
                    shutil.copyfile(cfg.photo_root / "labels" / f"{s.name}.png", lbl_path)
                records.append(
                    {
                        "source": s.name,
                        "shape_condition": shape_idx,
                        "style_condition": style_idx,
                        "image": str(img_path.relative_to(cfg.workspace)),
                        "label": str(lbl_path.relative_to(cfg.workspace)),
                        "image_sha256": sha256_file(img_path),
                        "label_sha256": sha256_file(lbl_path),
                    }
                )
                if len(previews) < 2:
                    previews.append(np.concatenate([s.image, img], axis=1))
            p["preview"].mkdir(parents=True, exist_ok=True)
            write_image_png(np.concatenate(previews, axis=0), p["preview"] / f"{arm}.png")

            manifest = {
                "arm": arm,
                "seed": cfg.seed,
                "config_sha": cfg.config_sha,
                "image_size": cfg.image_size,
                "checkpoints": fingerprints,
                "records": records,
            }
            mpath = arm_dir / "manifest.json"
            mpath.write_text(stable_json_dumps(manifest))
            manifests[arm] = mpath
            print(f"[synthesize] arm={arm}: {len(records)} pairs")
    return manifests


def _read_manifest(cfg: PipelineConfig, arm: str) -> tuple[dict, Path]:
    mpath = _paths(cfg)["synth"] / arm / "manifest.json"
    if not mpath.exists():
        raise StageDependencyError(f"{arm}: no synthesis manifest, run synthesize first")
    import json

    return json.loads(mpath.read_text()), mpath


def _verify_manifest(cfg: PipelineConfig, manifest: dict) -> None:
    """Refuse manifests whose recorded checksums mismatch the workspace."""
    p = _paths(cfg)
    for stage, fp in manifest["checkpoints"].items():
        if fp is None:
            continue
        ckpt = p["checkpoints"] / f"{stage}.pt"
        if not ckpt.exists():
            raise ProvenanceError(f"{stage}: checkpoint missing for manifest verification")
        blob = torch.load(ckpt, weights_only=True)
        if blob["fingerprint"] != fp:
            raise ProvenanceError(
                f"{stage}: checkpoint fingerprint changed since synthesis"
            )
    for rec in manifest["records"]:
        for key in ("image", "label"):
            f = cfg.workspace / rec[key]
            if not f.exists():
                raise ProvenanceError(f"missing synthesized file {rec[key]}")
            if sha256_file(f) != rec[f"{key}_sha256"]:
                raise ProvenanceError(f"synthesized file {rec[key]} was modified")


def _training_pairs(cfg: PipelineConfig, arm: str):
    from .datasets.io import read_image_png, read_label_png

    if arm == "source":
        photos = load_photo_dataset(cfg.photo_root, cfg.parser.num_classes)
        pairs = [(s.image, s.labels) for s in photos]
        names = [s.name for s in photos]
        return pairs, names, tree_fingerprint(cfg.photo_root)
    manifest, mpath = _read_manifest(cfg, arm)
    _verify_manifest(cfg, manifest)
    pairs, names = [], []
    for rec in manifest["records"]:
        pairs.append(
            (
                read_image_png(cfg.workspace / rec["image"]),
                read_label_png(cfg.workspace / rec["label"]),
            )
        )
        names.append(rec["source"])
    return pairs, names, sha256_file(mpath)


def cmd_train_parser(cfg: PipelineConfig, arm: str) -> Path:
    """Train one parsing model on the requested arm's training pairs."""
    if arm not in PARSER_ARMS:
        raise ValueError(f"unknown parser arm {arm!r}; choose from {PARSER_ARMS}")
    pairs, names, data_sha = _training_pairs(cfg, arm)
    parser_cfg = dataclasses.replace(cfg.parser, seed=derive_seed(cfg.seed, f"parser-{arm}"))
    with workspace_lock(cfg.workspace):
        net, log = train_parser(pairs, parser_cfg, names)
        p = _paths(cfg)
        p["checkpoints"].mkdir(parents=True, exist_ok=True)
        out = p["checkpoints"] / f"parser_{arm}.pt"
        torch.save(
            {
                "kind": "parser",
                "arm": arm,
                "net": net.state_dict(),
                "config": dataclasses.asdict(parser_cfg),
                "train_data_sha": data_sha,
                "fingerprint": param_fingerprint(net.state_dict()),
            },
            out,
        )
        _write_csv(p["logs"] / f"parser_{arm}.csv", log)
    print(f"[train-parser] arm={arm}: final loss {log[-1]['loss']:.4f}" if log
          else f"[train-parser] arm={arm}: 0 iters")
    return out


def load_parser_checkpoint(path):
    blob = torch.load(path, weights_only=True)
    cfg = ParseTrainConfig(**blob["config"])
    net = build_parsing_network(cfg.num_classes, cfg.width, cfg.seed)
    net.load_state_dict(blob["net"])
    net.eval()
    return net, blob


def _predict_padded(net, img: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    stride = net.out_stride
    ph = (stride - h % stride) % stride
    pw = (stride - w % stride) % stride
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)), mode="reflect")
    out = predict(net, img)
    return out[:h, :w]


def cmd_evaluate(cfg: PipelineConfig, arm: str):
    """Score one arm's parser on the annotated caricature evaluation set."""
    p = _paths(cfg)
    ckpt = p["checkpoints"] / f"parser_{arm}.pt"
    if not ckpt.exists():
        raise StageDependencyError(f"evaluate[{arm}]: parser checkpoint missing")
    net, blob = load_parser_checkpoint(ckpt)

    if arm == "source":
        expected = tree_fingerprint(cfg.photo_root)
        if blob["train_data_sha"] != expected:
            raise ProvenanceError("source: photo dataset changed since parser training")
    else:
        manifest, mpath = _read_manifest(cfg, arm)
        _verify_manifest(cfg, manifest)
        if blob["train_data_sha"] != sha256_file(mpath):
            raise ProvenanceError(f"{arm}: manifest changed since parser training")

    eval_set = load_photo_dataset(cfg.eval_root, cfg.parser.num_classes)
    cm = metrics.new_confusion(cfg.parser.num_classes)
    for s in eval_set:
        metrics.accumulate(cm, _predict_padded(net, s.image), s.labels)
    report = metrics.iou_report(cm)
    p["eval"].mkdir(parents=True, exist_ok=True)
    payload = {
        "arm": arm,
        "miou": report.miou,
        "per_class": {
            name: (float(v) if ok else None)
            for name, v, ok in zip(metrics.CLASS_NAMES, report.per_class, report.present)
        },
        "support": {n: int(c) for n, c in zip(metrics.CLASS_NAMES, report.support)},
    }
    (p["eval"] / f"report_{arm}.json").write_text(stable_json_dumps(payload))
    print(f"[evaluate] arm={arm}: mIoU {report.miou * 100:.2f}")
    return report


def cmd_run_ablation(cfg: PipelineConfig) -> dict:
    """Full run: prepare, adapt, synthesize all arms, train and score each."""
    cmd_prepare(cfg)
    cmd_train_shape(cfg)
    cmd_train_texture(cfg)
    cmd_synthesize(cfg, SYNTH_ARMS)
    reports = {}
    for arm in PARSER_ARMS:
        cmd_train_parser(cfg, arm)
        reports[arm] = cmd_evaluate(cfg, arm)
    rows = [(ARM_LABELS[arm], reports[arm]) for arm in PARSER_ARMS]
    md, csv_text = metrics.render_table(rows)
    p = _paths(cfg)
    p["eval"].mkdir(parents=True, exist_ok=True)
    (p["eval"] / "ablation.md").write_text(md)
    (p["eval"] / "ablation.csv").write_text(csv_text)
    print(md)
    return reports


def run_multi_seed_ablation(config_path, seeds, work_root) -> dict:
    """Run the toy ablation once per seed in isolated workspaces.

    Each seed gets a private copy of the config file so every relative path
    (data roots, workspace) lands inside its own directory. Returns per-seed
    and median mIoU per arm and writes a summary table under work_root.
    """
    config_text = Path(config_path).read_text()
    work_root = Path(work_root)
    per_seed = {arm: [] for arm in PARSER_ARMS}
    for seed in seeds:
        seed_dir = work_root / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        cfg_file = seed_dir / "config.ini"
        cfg_file.write_text(config_text)
        cfg = load_pipeline_config(cfg_file, seed_override=seed)
        cmd_make_toy_data(cfg)
        reports = cmd_run_ablation(cfg)
        for arm in PARSER_ARMS:
            per_seed[arm].append(reports[arm].miou)
    medians = {arm: statistics.median(per_seed[arm]) for arm in PARSER_ARMS}

    lines = ["arm," + ",".join(f"seed_{s}" for s in seeds) + ",median"]
    for arm in PARSER_ARMS:
        vals = ",".join(f"{v * 100:.2f}" for v in per_seed[arm])
        lines.append(f"{ARM_LABELS[arm]},{vals},{medians[arm] * 100:.2f}")
    (work_root / "summary.csv").write_text("\n".join(lines) + "\n")
    md = "| " + lines[0].replace(",", " | ") + " |\n"
    md += "|" + "|".join(["---"] * (len(seeds) + 2)) + "|\n"
    for line in lines[1:]:
        md += "| " + line.replace(",", " | ") + " |\n"
    (work_root / "summary.md").write_text(md)
    print(md)
    return {"per_seed": per_seed, "median": medians}
