"""Balanced dataset construction, manifests, and verification.

A build classifies the clean sources by content, fills each split with
equal thirds per content class, generates every pair from a per-entry
derived seed, then nudges each split's moire frequency-group counts under
a configured imbalance bound by regenerating entries with fresh transform
seeds. Everything is a pure function of (sources, config, master seed):
rebuilding produces a byte-identical tree, and any single entry can be
regenerated from its manifest row alone.

Layout::

    out_dir/
      manifest.json
      {train,val,test}/{clean,moire,pattern}/<id>.png
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .classify import (
    DEFAULT_BAND_EDGES,
    ContentClass,
    ContentThresholds,
    FrequencyGroup,
    classify_content,
    classify_frequency,
)
from .errors import (
    CropRegionError,
    DatasetLayoutError,
    ImageValueError,
    InsufficientSourcesError,
    RebalanceExhaustedError,
)
from .io import read_image, read_image_u8, write_png
from .pipeline import MoirePair, PipelineConfig, generate_pair
from .raster import to_uint8
from .seeding import derive_seed, rng_from

__all__ = [
    "SplitSpec",
    "ManifestEntry",
    "DatasetManifest",
    "VerificationReport",
    "MANIFEST_FORMAT",
    "MANIFEST_NAME",
    "class_quotas",
    "build_dataset",
    "verify_dataset",
    "load_manifest",
    "save_manifest",
]

MANIFEST_FORMAT = "moirebench-dataset/1"
MANIFEST_NAME = "manifest.json"
SPLIT_NAMES = ("train", "val", "test")

# Retries allowed for a single entry that cannot place a valid crop.
_CROP_RETRY_CAP = 16

_SOURCE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class SplitSpec:
    """Entry counts per split."""

    train: int = 10000
    val: int = 100
    test: int = 100

    def __post_init__(self):
        for name in SPLIT_NAMES:
            if int(getattr(self, name)) < 0:
                raise ImageValueError(f"split {name} must be >= 0")

    def sizes(self) -> dict:
        return {name: int(getattr(self, name)) for name in SPLIT_NAMES}

    def total(self) -> int:
        return sum(self.sizes().values())


def class_quotas(n: int) -> dict:
    """Equal thirds per content class, remainder to Mixed, then TextOnly.

    Counts always differ by at most 1; a 100-entry split comes out as
    TextOnly 33, FigureOnly 33, Mixed 34.
    """
    base, rem = divmod(int(n), 3)
    quotas = {cls.value: base for cls in ContentClass}
    for cls in (ContentClass.MIXED, ContentClass.TEXT_ONLY, ContentClass.FIGURE_ONLY)[:rem]:
        quotas[cls.value] += 1
    return quotas


@dataclass
class ManifestEntry:
    id: str
    split: str
    source: str
    content_class: str
    frequency_group: str
    seed: int
    config_hash: str
    files: dict  # {"clean": ..., "moire": ..., "pattern": ...} relative paths


@dataclass
class DatasetManifest:
    version: str
    master_seed: int
    balanced: bool
    pipeline_config: PipelineConfig
    content_thresholds: ContentThresholds
    frequency_band_edges: tuple
    freq_imbalance_ratio: float
    entries: list = field(default_factory=list)

    def split_entries(self, split: str) -> list:
        return [e for e in self.entries if e.split == split]

    def to_payload(self) -> dict:
        return {
            "version": self.version,
            "master_seed": self.master_seed,
            "balanced": self.balanced,
            "pipeline_config": dataclasses.asdict(self.pipeline_config),
            "content_thresholds": dataclasses.asdict(self.content_thresholds),
            "frequency_band_edges": list(self.frequency_band_edges),
            "freq_imbalance_ratio": self.freq_imbalance_ratio,
            "entries": [dataclasses.asdict(e) for e in self.entries],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "DatasetManifest":
        if payload.get("version") != MANIFEST_FORMAT:
            raise DatasetLayoutError(
                f"unsupported manifest version {payload.get('version')!r}"
            )
        return cls(
            version=payload["version"],
            master_seed=payload["master_seed"],
            balanced=payload["balanced"],
            pipeline_config=PipelineConfig(**payload["pipeline_config"]),
            content_thresholds=ContentThresholds(**payload["content_thresholds"]),
            frequency_band_edges=tuple(payload["frequency_band_edges"]),
            freq_imbalance_ratio=payload["freq_imbalance_ratio"],
            entries=[ManifestEntry(**e) for e in payload["entries"]],
        )


def save_manifest(manifest: DatasetManifest, dataset_dir) -> str:
    path = os.path.join(dataset_dir, MANIFEST_NAME)
    os.makedirs(dataset_dir, exist_ok=True)
    text = json.dumps(manifest.to_payload(), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def load_manifest(where) -> DatasetManifest:
    """Load a manifest from its path or from a dataset directory."""
    path = where
    if os.path.isdir(where):
        path = os.path.join(where, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise DatasetLayoutError(f"no manifest at {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetLayoutError(f"manifest {path} is not valid JSON: {exc}") from exc
    return DatasetManifest.from_payload(payload)


def _list_sources(source_dir) -> list:
    if not os.path.isdir(source_dir):
        raise DatasetLayoutError(f"source directory not found: {source_dir}")
    names = sorted(
        n for n in os.listdir(source_dir) if n.lower().endswith(_SOURCE_EXTENSIONS)
    )
    if not names:
        raise InsufficientSourcesError(f"no source images in {source_dir}")
    return [os.path.join(source_dir, n) for n in names]


def _classify_sources(paths, thresholds, log) -> dict:
    by_class = {cls.value: [] for cls in ContentClass}
    for i, path in enumerate(paths):
        cls = classify_content(read_image(path), thresholds)
        by_class[cls.value].append(path)
        if log and (i + 1) % 50 == 0:
            log(f"classified {i + 1}/{len(paths)} sources")
    return by_class


def _plan_assignments(by_class, split: SplitSpec, master_seed: int) -> dict:
    """Deal shuffled per-class pools into splits; no source repeats."""
    pools = {}
    for cls_value, paths in by_class.items():
        order = rng_from(master_seed, "assign", cls_value).permutation(len(paths))
        pools[cls_value] = [paths[i] for i in order]

    offsets = {cls.value: 0 for cls in ContentClass}
    plan = {}
    for split_name, n in split.sizes().items():
        quotas = class_quotas(n)
        picked = []
        for cls in ContentClass:
            want = quotas[cls.value]
            pool = pools[cls.value]
            start = offsets[cls.value]
            if start + want > len(pool):
                raise InsufficientSourcesError(
                    f"split {split_name!r} needs {want} {cls.value} sources, only "
                    f"{len(pool) - start} unassigned (of {len(pool)} total)"
                )
            picked.extend((path, cls.value) for path in pool[start : start + want])
            offsets[cls.value] = start + want
        # interleave classes so ids are not grouped by class
        order = rng_from(master_seed, "order", split_name).permutation(len(picked))
        plan[split_name] = [picked[i] for i in order]
    return plan


def _entry_seed(master_seed: int, split: str, index: int, attempt: int) -> int:
    if attempt == 0:
        return derive_seed(master_seed, split, index)
    return derive_seed(master_seed, split, index, attempt)


def _generate_entry(source_path, cfg, master_seed, split, index, attempt, band_edges):
    """Generate one entry, retrying crop placement failures in-line."""
    src = read_image(source_path)
    last = None
    for extra in range(_CROP_RETRY_CAP):
        seed = _entry_seed(master_seed, split, index, attempt + extra)
        try:
            pair = generate_pair(src, cfg, seed)
        except CropRegionError as exc:
            last = exc
            continue
        group = classify_frequency(pair.pattern, band_edges)
        return {
            "index": index,
            "attempt": attempt + extra,
            "seed": seed,
            "group": group.value,
            "pair": pair,
        }
    raise CropRegionError(
        f"entry {split}_{index:05d}: no valid crop in {_CROP_RETRY_CAP} attempts "
        f"({last}); sources are too small for output_size {cfg.output_size}"
    )


def _entry_paths(split: str, entry_id: str) -> dict:
    return {
        kind: f"{split}/{kind}/{entry_id}.png" for kind in ("clean", "moire", "pattern")
    }


def _write_pair(out_dir, split, entry_id, pair: MoirePair) -> dict:
    files = _entry_paths(split, entry_id)
    write_png(os.path.join(out_dir, files["clean"]), pair.clean)
    write_png(os.path.join(out_dir, files["moire"]), pair.moire)
    write_png(os.path.join(out_dir, files["pattern"]), pair.pattern)
    return files


def build_dataset(
    source_dir,
    out_dir,
    split: SplitSpec,
    cfg: PipelineConfig,
    master_seed: int,
    *,
    thresholds: ContentThresholds | None = None,
    band_edges=DEFAULT_BAND_EDGES,
    freq_imbalance_ratio: float = 0.10,
    rebalance_retry_cap: int | None = None,
    n_jobs: int = 1,
    log=None,
) -> DatasetManifest:
    """Build a balanced dataset tree under `out_dir`.

    Content classes are balanced exactly (quota selection); frequency
    groups are rebalanced per split by regenerating the most over-
    represented entries with fresh jitter seeds until
    ``max - min <= freq_imbalance_ratio * split_size`` or the retry cap
    (default ``10 * split_size``) runs out. On exhaustion the manifest is
    still written, flagged unbalanced, and
    :class:`RebalanceExhaustedError` is raised.

    Raises
    ------
    InsufficientSourcesError
        When a split cannot fill its per-class quotas.
    RebalanceExhaustedError
        When a split stays outside the imbalance bound.
    """
    thresholds = thresholds or ContentThresholds()
    band_edges = tuple(float(e) for e in band_edges)
    if split.total() < 3:
        raise ImageValueError("split total must be at least 3 for content balancing")
    if freq_imbalance_ratio < 0.0:
        raise ImageValueError("freq_imbalance_ratio must be >= 0")

    paths = _list_sources(source_dir)
    if log:
        log(f"classifying {len(paths)} sources")
    by_class = _classify_sources(paths, thresholds, log)
    plan = _plan_assignments(by_class, split, master_seed)

    os.makedirs(out_dir, exist_ok=True)
    entries = []
    unbalanced_splits = []
    for split_name in SPLIT_NAMES:
        assignment = plan[split_name]
        n = len(assignment)
        if n == 0:
            continue
        if log:
            log(f"generating {n} {split_name} pairs")

        tasks = (
            delayed(_generate_entry)(
                src_path, cfg, master_seed, split_name, i, 0, band_edges
            )
            for i, (src_path, _) in enumerate(assignment)
        )
        runner = Parallel(n_jobs=n_jobs, return_as="generator")
        records = [None] * n
        for done, rec in enumerate(runner(tasks)):
            i = rec["index"]
            entry_id = f"{split_name}_{i:05d}"
            _write_pair(out_dir, split_name, entry_id, rec["pair"])
            rec["pair"] = None  # free the arrays, files are on disk
            records[i] = rec
            if log and (done + 1) % 25 == 0:
                log(f"  {done + 1}/{n}")

        # Frequency rebalancing: regenerate from the largest group until
        # the spread fits the bound or the budget runs out.
        bound = freq_imbalance_ratio * n
        budget = rebalance_retry_cap if rebalance_retry_cap is not None else 10 * n
        regens = 0
        while True:
            counts = {g.value: 0 for g in FrequencyGroup}
            for rec in records:
                counts[rec["group"]] += 1
            if max(counts.values()) - min(counts.values()) <= bound:
                break
            if regens >= budget:
                unbalanced_splits.append(split_name)
                if log:
                    log(
                        f"  {split_name}: imbalance bound {bound:g} unreachable "
                        f"after {regens} regenerations {counts}"
                    )
                break
            largest = max(counts, key=lambda g: (counts[g], g))
            candidates = [r for r in records if r["group"] == largest]
            victim = min(candidates, key=lambda r: (r["attempt"], r["index"]))
            i = victim["index"]
            rec = _generate_entry(
                assignment[i][0],
                cfg,
                master_seed,
                split_name,
                i,
                victim["attempt"] + 1,
                band_edges,
            )
            entry_id = f"{split_name}_{i:05d}"
            _write_pair(out_dir, split_name, entry_id, rec["pair"])
            rec["pair"] = None
            records[i] = rec
            regens += 1
            if log and regens % 20 == 0:
                log(f"  rebalancing {split_name}: {regens} regenerations, {counts}")

        for i, (src_path, cls_value) in enumerate(assignment):
            entry_id = f"{split_name}_{i:05d}"
            entries.append(
                ManifestEntry(
                    id=entry_id,
                    split=split_name,
                    source=os.path.abspath(src_path),
                    content_class=cls_value,
                    frequency_group=records[i]["group"],
                    seed=records[i]["seed"],
                    config_hash=cfg.digest(),
                    files=_entry_paths(split_name, entry_id),
                )
            )

    manifest = DatasetManifest(
        version=MANIFEST_FORMAT,
        master_seed=int(master_seed),
        balanced=not unbalanced_splits,
        pipeline_config=cfg,
        content_thresholds=thresholds,
        frequency_band_edges=band_edges,
        freq_imbalance_ratio=freq_imbalance_ratio,
        entries=entries,
    )
    save_manifest(manifest, out_dir)
    if unbalanced_splits:
        raise RebalanceExhaustedError(
            "frequency rebalancing exhausted for split(s) "
            + ", ".join(unbalanced_splits)
            + "; manifest written with balanced=false"
        )
    return manifest


@dataclass
class VerificationReport:
    entries_checked: int
    files_checked: int
    regenerated: list
    violations: list  # {"entry": id or None, "kind": str, "detail": str}

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "OK" if self.ok else f"{len(self.violations)} violation(s)"
        lines = [
            f"checked {self.entries_checked} entries / {self.files_checked} files, "
            f"regenerated {len(self.regenerated)}: {status}"
        ]
        for v in self.violations:
            where = v["entry"] or "-"
            lines.append(f"  [{v['kind']}] {where}: {v['detail']}")
        return "\n".join(lines)


def verify_dataset(
    dataset_dir,
    *,
    regen_ids=None,
    regen_sample: int = 0,
    seed: int = 0,
) -> VerificationReport:
    """Check a dataset tree against its manifest.

    Validates file existence and dimensions, id uniqueness, balance
    invariants, and config hashes; optionally regenerates chosen entries
    (explicit `regen_ids`, or `regen_sample` drawn deterministically from
    `seed`) from their recorded sources and seeds and compares the stored
    images byte for byte. Violations are report content, never raises.
    """
    manifest = load_manifest(dataset_dir)
    violations = []
    files_checked = 0

    def flag(kind, entry, detail):
        violations.append({"kind": kind, "entry": entry, "detail": detail})

    seen = set()
    for e in manifest.entries:
        if e.id in seen:
            flag("duplicate-id", e.id, "id appears more than once")
        seen.add(e.id)
        if e.config_hash != manifest.pipeline_config.digest():
            flag(
                "config-hash-mismatch",
                e.id,
                "entry hash does not match the manifest pipeline config",
            )
        for kind, rel in e.files.items():
            path = os.path.join(dataset_dir, rel)
            files_checked += 1
            if not os.path.isfile(path):
                flag("missing-file", e.id, rel)
                continue
            img = read_image_u8(path)
            k = manifest.pipeline_config.output_size
            want_shape = (k, k) if kind == "pattern" else (k, k, 3)
            if img.shape != want_shape:
                flag(
                    "dimension-mismatch",
                    e.id,
                    f"{rel}: shape {img.shape}, expected {want_shape}",
                )

    for split_name in SPLIT_NAMES:
        split_entries = manifest.split_entries(split_name)
        n = len(split_entries)
        if n == 0:
            continue
        counts = {cls.value: 0 for cls in ContentClass}
        for e in split_entries:
            counts[e.content_class] += 1
        if max(counts.values()) - min(counts.values()) > 1:
            flag("content-imbalance", None, f"{split_name}: {counts}")
        gcounts = {g.value: 0 for g in FrequencyGroup}
        for e in split_entries:
            gcounts[e.frequency_group] += 1
        bound = manifest.freq_imbalance_ratio * n
        if manifest.balanced and max(gcounts.values()) - min(gcounts.values()) > bound:
            flag(
                "frequency-imbalance",
                None,
                f"{split_name}: {gcounts} exceeds bound {bound:g}",
            )

    by_id = {e.id: e for e in manifest.entries}
    chosen = list(regen_ids or [])
    for entry_id in chosen:
        if entry_id not in by_id:
            flag("unknown-entry", entry_id, "regeneration requested for unknown id")
    chosen = [c for c in chosen if c in by_id]
    if regen_sample > 0 and manifest.entries:
        pool = sorted(set(by_id) - set(chosen))
        take = min(regen_sample, len(pool))
        picks = rng_from(seed, "verify-sample").choice(len(pool), size=take, replace=False)
        chosen.extend(pool[i] for i in sorted(picks))

    regenerated = []
    for entry_id in chosen:
        e = by_id[entry_id]
        if not os.path.isfile(e.source):
            flag("missing-source", e.id, e.source)
            continue
        pair = generate_pair(read_image(e.source), manifest.pipeline_config, e.seed)
        regenerated.append(entry_id)
        for kind, img in (
            ("clean", pair.clean),
            ("moire", pair.moire),
            ("pattern", pair.pattern),
        ):
            path = os.path.join(dataset_dir, e.files[kind])
            if not os.path.isfile(path):
                continue  # already flagged missing
            stored = read_image_u8(path)
            if stored.shape != to_uint8(img).shape or not np.array_equal(
                stored, to_uint8(img)
            ):
                flag("regeneration-mismatch", e.id, f"{kind} differs from regeneration")

    return VerificationReport(
        entries_checked=len(manifest.entries),
        files_checked=files_checked,
        regenerated=regenerated,
        violations=violations,
    )
