"""Blinded pairwise opinion study: design, scoring, storage, export.

A study shows each judge every (method, image) pair once, side by side
with the ground truth. Placement is decided by a fair coin per query and
the judge rates the right image against the left on 1..5. Scores are
normalized at record time so a stored score always reads "restored
result versus ground truth" regardless of placement: 1 is much worse,
3 is equal, 5 is much better.

Per method, a complete study of J judges and N images yields a
mean-opinion score in [J*N, 5*J*N] (the sum of normalized scores).

The design is a pure function of the study seed, so reloading a study
file reproduces the exact same query order and coin flips.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

from ..classify import ContentClass
from ..errors import (
    AlreadyRatedError,
    ImageValueError,
    ScoreRangeError,
    StudyError,
    UnknownQueryError,
)
from ..seeding import derive_seed, rng_from

__all__ = [
    "STUDY_FORMAT",
    "EXPORT_FORMAT",
    "MosQuery",
    "MosStudy",
    "Rating",
    "RatingStore",
    "create_study",
    "save_study",
    "load_study",
    "select_mos_images",
    "compute_mos",
    "export_results",
]

STUDY_FORMAT = "moirebench-study/1"
EXPORT_FORMAT = "moirebench-mos-export/1"

# Per 10 selected images: figures dominate because synthetic screen
# patterns disturb natural content the most; remainder order matches.
_SELECT_WEIGHTS = (
    (ContentClass.FIGURE_ONLY, 4),
    (ContentClass.TEXT_ONLY, 3),
    (ContentClass.MIXED, 3),
)


@dataclass(frozen=True)
class MosQuery:
    """One judgement: a (method, image) pair shown to one judge.

    `flip` means the restored image is placed on the LEFT (ground truth
    right); unflipped queries show ground truth left, restored right.
    """

    judge: int
    seq: int  # position in this judge's shuffled order
    method: str
    image: str
    flip: bool

    @property
    def qid(self) -> str:
        return f"j{self.judge:02d}-{self.seq:04d}"

    def normalize(self, raw: int) -> int:
        """Convert a raw right-vs-left score to restored-vs-truth."""
        if not isinstance(raw, int) or isinstance(raw, bool) or not 1 <= raw <= 5:
            raise ScoreRangeError(f"score must be an integer in 1..5, got {raw!r}")
        return 6 - raw if self.flip else raw


@dataclass
class MosStudy:
    seed: int
    judges: int
    methods: dict  # name -> directory of restored images
    gt_dir: str
    images: list  # entry ids, file stem == id
    operator_key: str
    queries: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.queries:
            self.queries = _build_queries(
                self.seed, self.judges, sorted(self.methods), self.images
            )
        self._by_qid = {q.qid: q for q in self.queries}

    def query(self, qid: str) -> MosQuery:
        try:
            return self._by_qid[qid]
        except KeyError:
            raise UnknownQueryError(f"no query {qid!r} in this study") from None

    def judge_queries(self, judge: int) -> list:
        if not 0 <= judge < self.judges:
            raise UnknownQueryError(f"judge must be in 0..{self.judges - 1}")
        return [q for q in self.queries if q.judge == judge]

    def image_path(self, method: str, image: str) -> str:
        if method not in self.methods:
            raise StudyError(f"unknown method {method!r}")
        return os.path.join(self.methods[method], f"{image}.png")

    def gt_path(self, image: str) -> str:
        return os.path.join(self.gt_dir, f"{image}.png")


def _build_queries(seed, judges, method_names, images) -> list:
    queries = []
    pairs = [(m, img) for m in method_names for img in images]
    for judge in range(judges):
        order = rng_from(seed, "judge", judge, "order").permutation(len(pairs))
        flips = rng_from(seed, "judge", judge, "flip").integers(0, 2, size=len(pairs))
        for seq, k in enumerate(order):
            method, image = pairs[k]
            queries.append(
                MosQuery(
                    judge=judge,
                    seq=seq,
                    method=method,
                    image=image,
                    flip=bool(flips[seq]),
                )
            )
    return queries


def create_study(methods, gt_dir, images, judges, seed) -> MosStudy:
    """Design a complete study; every referenced file must exist.

    `methods` maps a method name to the directory holding its restored
    images; each image id `x` resolves to `<dir>/x.png`.
    """
    if not methods:
        raise StudyError("a study needs at least one method")
    if not images:
        raise StudyError("a study needs at least one image")
    if int(judges) < 1:
        raise StudyError("a study needs at least one judge")
    if len(set(images)) != len(images):
        raise StudyError("image ids must be unique")

    methods = {str(name): os.path.abspath(d) for name, d in methods.items()}
    study = MosStudy(
        seed=int(seed),
        judges=int(judges),
        methods=methods,
        gt_dir=os.path.abspath(gt_dir),
        images=[str(i) for i in images],
        operator_key=hashlib.sha256(
            f"operator:{derive_seed(int(seed), 'operator-key')}".encode()
        ).hexdigest()[:32],
    )

    missing = []
    for image in study.images:
        if not os.path.isfile(study.gt_path(image)):
            missing.append(study.gt_path(image))
        for method in study.methods:
            if not os.path.isfile(study.image_path(method, image)):
                missing.append(study.image_path(method, image))
    if missing:
        listing = ", ".join(missing[:5]) + ("..." if len(missing) > 5 else "")
        raise StudyError(f"{len(missing)} study file(s) missing: {listing}")
    return study


def save_study(study: MosStudy, path) -> str:
    payload = {
        "version": STUDY_FORMAT,
        "seed": study.seed,
        "judges": study.judges,
        "methods": study.methods,
        "gt_dir": study.gt_dir,
        "images": study.images,
        "operator_key": study.operator_key,
    }
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def load_study(path) -> MosStudy:
    if not os.path.isfile(path):
        raise StudyError(f"study file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StudyError(f"{path}: invalid JSON: {exc}") from exc
    if payload.get("version") != STUDY_FORMAT:
        raise StudyError(f"unsupported study version {payload.get('version')!r}")
    try:
        return MosStudy(
            seed=payload["seed"],
            judges=payload["judges"],
            methods=payload["methods"],
            gt_dir=payload["gt_dir"],
            images=payload["images"],
            operator_key=payload["operator_key"],
        )
    except KeyError as exc:
        raise StudyError(f"{path}: missing study field {exc}") from exc


def select_mos_images(manifest, n: int, seed: int, split: str = "test") -> list:
    """Pick `n` entry ids from a dataset split, figure-heavy by design.

    Quota per 10: 4 FigureOnly, 3 TextOnly, 3 Mixed; the shortfall of an
    under-populated class spills to the next class in that order. Draws
    are deterministic in `seed`.
    """
    if n < 1:
        raise ImageValueError("n must be >= 1")
    entries = manifest.split_entries(split)
    if len(entries) < n:
        raise StudyError(
            f"split {split!r} has {len(entries)} entries, cannot select {n}"
        )
    by_class = {cls: [] for cls, _ in _SELECT_WEIGHTS}
    for e in entries:
        by_class[ContentClass(e.content_class)].append(e.id)

    total_weight = sum(w for _, w in _SELECT_WEIGHTS)
    want = {}
    assigned = 0
    for cls, w in _SELECT_WEIGHTS:
        want[cls] = n * w // total_weight
        assigned += want[cls]
    for cls, _ in _SELECT_WEIGHTS:
        if assigned == n:
            break
        want[cls] += 1
        assigned += 1

    chosen = []
    shortfall = 0
    for cls, _ in _SELECT_WEIGHTS:
        pool = sorted(by_class[cls])
        take = min(want[cls] + shortfall, len(pool))
        shortfall = want[cls] + shortfall - take
        if take:
            picks = rng_from(seed, "select", cls.value).choice(
                len(pool), size=take, replace=False
            )
            chosen.extend(pool[i] for i in sorted(picks))
    if len(chosen) < n:  # spill wrapped past the last class
        rest = sorted(set(e.id for e in entries) - set(chosen))
        picks = rng_from(seed, "select", "rest").choice(
            len(rest), size=n - len(chosen), replace=False
        )
        chosen.extend(rest[i] for i in sorted(picks))
    return chosen


@dataclass(frozen=True)
class Rating:
    """One recorded judgement. `score` is already normalized; `raw` is
    what the judge actually entered. `timestamp` exists only in the log,
    never in exports."""

    qid: str
    judge: int
    method: str
    image: str
    flip: bool
    raw: int
    score: int
    timestamp: float


class RatingStore:
    """Append-only JSONL rating log, replayed on open.

    One writer at a time; the service layer serializes access. Every
    append is flushed and fsynced so a crash loses at most the rating
    being written.
    """

    def __init__(self, path):
        self.path = path
        self.ratings = {}
        if os.path.isfile(path):
            self._replay()

    def _replay(self):
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    rating = Rating(**rec)
                except (json.JSONDecodeError, TypeError) as exc:
                    raise StudyError(
                        f"{self.path}:{lineno}: bad rating record: {exc}"
                    ) from exc
                if rating.qid in self.ratings:
                    raise StudyError(
                        f"{self.path}:{lineno}: duplicate rating for {rating.qid}"
                    )
                self.ratings[rating.qid] = rating

    def __len__(self):
        return len(self.ratings)

    def __contains__(self, qid):
        return qid in self.ratings

    def record(self, study: MosStudy, qid: str, raw_score: int) -> Rating:
        query = study.query(qid)
        if qid in self.ratings:
            raise AlreadyRatedError(f"query {qid} already has a rating")
        rating = Rating(
            qid=qid,
            judge=query.judge,
            method=query.method,
            image=query.image,
            flip=query.flip,
            raw=int(raw_score),
            score=query.normalize(raw_score),
            timestamp=time.time(),
        )
        parent = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(parent, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(dataclasses.asdict(rating), sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self.ratings[qid] = rating
        return rating


def compute_mos(study: MosStudy, store: RatingStore) -> dict:
    """Sum of normalized scores per method over the recorded ratings."""
    totals = {name: 0 for name in sorted(study.methods)}
    for rating in store.ratings.values():
        if rating.method in totals:
            totals[rating.method] += rating.score
    return totals


def export_results(study: MosStudy, store: RatingStore) -> dict:
    """Deterministic, timestamp-free export, methods ranked by MOS desc.

    Ties break by method name ascending. Individual ratings carry only
    method, image, flip, score, and judge.
    """
    mos = compute_mos(study, store)
    counts = {name: 0 for name in mos}
    for rating in store.ratings.values():
        if rating.method in counts:
            counts[rating.method] += 1
    ranked = sorted(mos, key=lambda name: (-mos[name], name))
    ratings = sorted(
        store.ratings.values(), key=lambda r: (r.method, r.judge, r.image)
    )
    return {
        "version": EXPORT_FORMAT,
        "judges": study.judges,
        "images": len(study.images),
        "methods": [
            {"method": name, "mos": mos[name], "ratings": counts[name]}
            for name in ranked
        ],
        "ratings": [
            {
                "method": r.method,
                "image": r.image,
                "flip": r.flip,
                "score": r.score,
                "judge": r.judge,
            }
            for r in ratings
        ],
    }
