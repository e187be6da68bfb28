"""Deterministic synthetic LiDAR-like scenes with exact ground truth.

Instances are axis-aligned boxes whose points are sampled only on the box
faces, so the geometric instance center is never itself a sampled point (the
regression target is an "imaginary" center, as in real scans of hollow
objects). A ground slab provides stuff points. All randomness flows through
a counter-based Philox generator keyed by the scene seed, making scenes
bit-reproducible across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .data import PanopticLabels, PointCloud, PredictionSet
from .errors import PlacementError, TaxonomyError
from .supervision import confidence_targets, offset_targets
from .taxonomy import ClassTaxonomy

__all__ = ["SceneConfig", "OracleNoise", "default_taxonomy", "generate_scene",
           "oracle_predict"]

_GROUND_SIGMA_Z = 0.02  # ground slab thickness (m)


def default_taxonomy() -> ClassTaxonomy:
    """Small synthetic taxonomy: two stuff and three things classes."""
    return ClassTaxonomy.from_pairs(
        things=[(10, "crate"), (11, "pole"), (12, "cart")],
        stuff=[(1, "ground"), (2, "wall")],
        ignore_id=0,
    )


@dataclass(frozen=True)
class SceneConfig:
    """Parameters of one synthetic scene."""

    seed: int = 0
    n_instances: int = 12
    instance_classes: tuple[tuple[int, float], ...] = ((10, 1.0), (11, 1.0), (12, 1.0))
    box_size_range: tuple[tuple[float, float], ...] = (
        (0.5, 1.5), (0.5, 1.5), (0.5, 1.5))          # per-axis (min, max) full size
    placement_area: float = 30.0                      # side of the square area (m)
    min_center_separation: float = 2.0                # pairwise 3-D center distance (m)
    points_per_instance_range: tuple[int, int] = (60, 150)
    ground_points: int = 2000
    ground_class: int = 1
    max_placement_attempts: int = 10000               # per instance

    def __post_init__(self):
        if self.n_instances < 0:
            raise ValueError("n_instances must be >= 0")
        if self.n_instances and not self.instance_classes:
            raise ValueError("instance_classes must be non-empty")
        for lo, hi in self.box_size_range:
            if not (0.0 < lo <= hi):
                raise ValueError(f"box sizes must satisfy 0 < min <= max, got ({lo}, {hi})")
        if len(self.box_size_range) != 3:
            raise ValueError("box_size_range needs one (min, max) per axis")
        lo, hi = self.points_per_instance_range
        if not (1 <= lo <= hi):
            raise ValueError("points_per_instance_range must satisfy 1 <= lo <= hi")
        if self.placement_area <= 0 or self.min_center_separation < 0:
            raise ValueError("placement_area must be positive and separation non-negative")

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "n_instances": int(self.n_instances),
            "instance_classes": [[int(c), float(w)] for c, w in self.instance_classes],
            "box_size_range": [list(map(float, r)) for r in self.box_size_range],
            "placement_area": float(self.placement_area),
            "min_center_separation": float(self.min_center_separation),
            "points_per_instance_range": list(self.points_per_instance_range),
            "ground_points": int(self.ground_points),
            "ground_class": int(self.ground_class),
            "max_placement_attempts": int(self.max_placement_attempts),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SceneConfig":
        kwargs = dict(data)
        if "instance_classes" in kwargs:
            kwargs["instance_classes"] = tuple((int(c), float(w))
                                               for c, w in kwargs["instance_classes"])
        if "box_size_range" in kwargs:
            kwargs["box_size_range"] = tuple(tuple(map(float, r))
                                             for r in kwargs["box_size_range"])
        if "points_per_instance_range" in kwargs:
            kwargs["points_per_instance_range"] = tuple(kwargs["points_per_instance_range"])
        return cls(**kwargs)

    def with_seed(self, seed: int) -> "SceneConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class OracleNoise:
    """Noise model of the synthetic prediction oracle.

    * ``offset_sigma`` — isotropic Gaussian noise added to ground-truth
      offsets on things points;
    * ``offset_clip`` — optional hard bound on the noise norm (vectors are
      rescaled onto the bound);
    * ``semantic_flip_prob`` — probability of replacing a point's semantic
      class by a uniformly random other class;
    * ``confidence_sigma`` — kernel width of the emitted confidences, which
      are perfectly calibrated against the actual offset error.
    """

    offset_sigma: float = 0.0
    semantic_flip_prob: float = 0.0
    confidence_sigma: float = 1.0
    offset_clip: Optional[float] = None

    def __post_init__(self):
        if self.offset_sigma < 0:
            raise ValueError("offset_sigma must be >= 0")
        if not (0.0 <= self.semantic_flip_prob <= 1.0):
            raise ValueError("semantic_flip_prob must lie in [0, 1]")
        if self.confidence_sigma <= 0:
            raise ValueError("confidence_sigma must be positive")
        if self.offset_clip is not None and self.offset_clip <= 0:
            raise ValueError("offset_clip must be positive when set")

    def to_json_dict(self) -> dict:
        return {
            "offset_sigma": float(self.offset_sigma),
            "semantic_flip_prob": float(self.semantic_flip_prob),
            "confidence_sigma": float(self.confidence_sigma),
            "offset_clip": None if self.offset_clip is None else float(self.offset_clip),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OracleNoise":
        return cls(**data)


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter-based with an explicit key: same seed, same stream,
    # on every platform
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _sample_box_faces(rng: np.random.Generator, half: np.ndarray, k: int) -> np.ndarray:
    """Sample k points uniformly on the surface of a centered box."""
    hx, hy, hz = half
    areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy])
    cum = np.cumsum(areas / areas.sum())
    face = np.searchsorted(cum, rng.random(k), side="right")
    ab = rng.random((k, 2)) * 2.0 - 1.0  # in-plane coordinates in [-1, 1)
    pts = np.empty((k, 3), dtype=np.float64)
    for f in range(6):
        rows = face == f
        if not rows.any():
            continue
        axis = f // 2
        sign = 1.0 if f % 2 == 0 else -1.0
        o1, o2 = [a for a in range(3) if a != axis]
        pts[rows, axis] = sign * half[axis]
        pts[rows, o1] = ab[rows, 0] * half[o1]
        pts[rows, o2] = ab[rows, 1] * half[o2]
    return pts


def generate_scene(config: SceneConfig,
                   taxonomy: ClassTaxonomy | None = None
                   ) -> tuple[PointCloud, PanopticLabels]:
    """Generate one scene; same config (incl. seed) gives bit-identical output."""
    if taxonomy is None:
        taxonomy = default_taxonomy()
    for cid, _ in config.instance_classes:
        if not taxonomy.is_things(cid):
            raise TaxonomyError(f"instance class {cid} is not a things class")
    if config.ground_points and not taxonomy.is_stuff(config.ground_class):
        raise TaxonomyError(f"ground class {config.ground_class} is not a stuff class")

    rng = _rng(config.seed)
    n = config.n_instances

    # 1. instance classes (weighted draw)
    weights = np.array([w for _, w in config.instance_classes], dtype=np.float64)
    class_ids = np.array([c for c, _ in config.instance_classes], dtype=np.uint32)
    cum = np.cumsum(weights / weights.sum())
    inst_class = class_ids[np.searchsorted(cum, rng.random(n), side="right")] if n \
        else np.empty(0, dtype=np.uint32)

    # 2. box sizes
    ranges = np.array(config.box_size_range, dtype=np.float64)
    sizes = ranges[:, 0] + rng.random((n, 3)) * (ranges[:, 1] - ranges[:, 0])
    halves = sizes / 2.0

    # 3. centers, rejection-sampled to honor the pairwise separation
    half_area = config.placement_area / 2.0
    centers = np.empty((n, 3), dtype=np.float64)
    for i in range(n):
        for attempt in range(config.max_placement_attempts + 1):
            if attempt == config.max_placement_attempts:
                raise PlacementError(
                    f"could not place instance {i + 1}/{n} with separation "
                    f">= {config.min_center_separation} in a {config.placement_area} m area")
            xy = rng.random(2) * config.placement_area - half_area
            z = halves[i, 2] + 0.05 + rng.random() * 1.45
            cand = np.array([xy[0], xy[1], z])
            if i == 0 or (np.linalg.norm(centers[:i] - cand, axis=1)
                          >= config.min_center_separation).all():
                centers[i] = cand
                break

    # 4. per-instance point counts
    lo, hi = config.points_per_instance_range
    counts = lo + np.floor(rng.random(n) * (hi - lo + 1)).astype(np.int64)
    counts = np.minimum(counts, hi)

    # 5. face-sampled instance points
    chunks, sems, insts = [], [], []
    for i in range(n):
        pts = _sample_box_faces(rng, halves[i], int(counts[i])) + centers[i]
        chunks.append(pts)
        sems.append(np.full(int(counts[i]), inst_class[i], dtype=np.uint32))
        insts.append(np.full(int(counts[i]), i + 1, dtype=np.uint32))

    # 6. ground slab
    g = config.ground_points
    if g:
        gxy = rng.random((g, 2)) * config.placement_area - half_area
        gz = rng.normal(0.0, _GROUND_SIGMA_Z, g)
        chunks.append(np.column_stack([gxy, gz]))
        sems.append(np.full(g, config.ground_class, dtype=np.uint32))
        insts.append(np.zeros(g, dtype=np.uint32))

    coords = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 3))
    semantic = np.concatenate(sems) if sems else np.empty(0, dtype=np.uint32)
    instance = np.concatenate(insts) if insts else np.empty(0, dtype=np.uint32)

    # 7. intensities, then a global shuffle so point order carries no signal
    intensity = rng.random(coords.shape[0])
    perm = rng.permutation(coords.shape[0])
    cloud = PointCloud(coords=coords[perm], features=intensity[perm])
    labels = PanopticLabels(semantic=semantic[perm], instance=instance[perm])
    return cloud, labels


def oracle_predict(cloud: PointCloud, labels: PanopticLabels,
                   taxonomy: ClassTaxonomy, noise: OracleNoise | None = None,
                   seed: int = 0) -> PredictionSet:
    """Derive predictions from ground truth under a controllable noise model.

    Offsets are the exact ground-truth offsets plus (optionally clipped)
    Gaussian noise on things points. Confidences are perfectly calibrated:
    each one is the Gaussian-kernel confidence target evaluated at the point's
    *actual* offset error, so zero noise yields confidence 1 on things points.
    """
    if noise is None:
        noise = OracleNoise()
    rng = _rng(seed)
    n = len(cloud)
    targets = offset_targets(cloud, labels, taxonomy)
    mask = targets.things_mask

    eps = np.zeros((n, 3), dtype=np.float64)
    k = int(mask.sum())
    if k and noise.offset_sigma > 0:
        raw = rng.normal(0.0, noise.offset_sigma, (k, 3))
        if noise.offset_clip is not None:
            norms = np.linalg.norm(raw, axis=1)
            over = norms > noise.offset_clip
            raw[over] *= (noise.offset_clip / norms[over])[:, None]
        eps[mask] = raw
    offsets = targets.targets + eps

    semantic = np.array(labels.semantic, dtype=np.uint32, copy=True)
    if noise.semantic_flip_prob > 0:
        flips = rng.random(n) < noise.semantic_flip_prob
        rows = np.flatnonzero(flips)
        if rows.size:
            ids = np.array(taxonomy.class_ids, dtype=np.uint32)
            pos = {int(c): i for i, c in enumerate(ids)}
            true_pos = np.array([pos.get(int(s), -1) for s in semantic[rows]])
            r = rng.integers(0, len(ids) - 1, rows.size)
            any_class = rng.integers(0, len(ids), rows.size)
            # skip the true class when it is a taxonomy class; otherwise any class
            r = np.where(true_pos >= 0, r + (r >= true_pos), any_class)
            semantic[rows] = ids[r]

    err = np.zeros(n, dtype=np.float64)
    err[mask] = np.linalg.norm(eps[mask], axis=1)
    confidence = confidence_targets(err, mask, noise.confidence_sigma)
    return PredictionSet(semantic=semantic, offsets=offsets, confidence=confidence)


def save_scene_config(path: str | Path, scene: SceneConfig, noise: OracleNoise,
                      taxonomy: ClassTaxonomy) -> None:
    """Bundle scene + noise + taxonomy into one JSON config file."""
    Path(path).write_text(json.dumps({
        "scene": scene.to_json_dict(),
        "noise": noise.to_json_dict(),
        "taxonomy": taxonomy.to_json_dict(),
    }, indent=2) + "\n")


def load_scene_config(path: str | Path) -> tuple[SceneConfig, OracleNoise, ClassTaxonomy]:
    data = json.loads(Path(path).read_text())
    scene = SceneConfig.from_json_dict(data.get("scene", {}))
    noise = OracleNoise.from_json_dict(data.get("noise", {}))
    taxonomy = (ClassTaxonomy.from_json_dict(data["taxonomy"])
                if "taxonomy" in data else default_taxonomy())
    return scene, noise, taxonomy
