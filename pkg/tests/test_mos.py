"""Opinion-study protocol and HTTP service."""

import json
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

from moirebench.errors import (
    AlreadyRatedError,
    ScoreRangeError,
    StudyError,
    UnknownQueryError,
)
from moirebench.io import write_png
from moirebench.mos.service import create_app, default_ratings_path, image_token
from moirebench.mos.study import (
    MosStudy,
    RatingStore,
    compute_mos,
    create_study,
    export_results,
    load_study,
    save_study,
)
from moirebench.seeding import rng_from


@pytest.fixture()
def study_tree(tmp_path):
    """Tiny study fixture: 2 methods x 3 images, real PNG files."""
    gt = tmp_path / "gt"
    os.makedirs(gt)
    images = [f"img_{i:02d}" for i in range(3)]
    rng = rng_from(1, "mos-fixture")
    for img in images:
        write_png(gt / f"{img}.png", rng.uniform(size=(8, 8, 3)))
    methods = {}
    for name in ("alpha", "beta"):
        d = tmp_path / name
        os.makedirs(d)
        for img in images:
            write_png(d / f"{img}.png", rng.uniform(size=(8, 8, 3)))
        methods[name] = str(d)
    return methods, str(gt), images, tmp_path


def make_study(study_tree, judges=2, seed=5):
    methods, gt, images, _ = study_tree
    return create_study(methods, gt, images, judges=judges, seed=seed)


class TestDesign:
    def test_complete_design(self, study_tree):
        study = make_study(study_tree, judges=2)
        assert len(study.queries) == 2 * 2 * 3
        for judge in range(2):
            seen = {(q.method, q.image) for q in study.judge_queries(judge)}
            assert len(seen) == 6  # every pair exactly once

    def test_judges_get_different_orders(self, study_tree):
        study = make_study(study_tree, judges=4)
        orders = {
            tuple((q.method, q.image) for q in study.judge_queries(j))
            for j in range(4)
        }
        assert len(orders) > 1

    def test_flips_use_both_sides(self, study_tree):
        study = make_study(study_tree, judges=4)
        flips = [q.flip for q in study.queries]
        assert any(flips) and not all(flips)

    def test_design_is_pure_function_of_seed(self, study_tree):
        a = make_study(study_tree, seed=9)
        b = make_study(study_tree, seed=9)
        assert [(q.qid, q.flip, q.method, q.image) for q in a.queries] == [
            (q.qid, q.flip, q.method, q.image) for q in b.queries
        ]

    def test_missing_file_rejected(self, study_tree):
        methods, gt, images, _ = study_tree
        with pytest.raises(StudyError, match="missing"):
            create_study(methods, gt, images + ["ghost"], judges=1, seed=1)

    def test_file_roundtrip(self, study_tree, tmp_path):
        study = make_study(study_tree)
        path = tmp_path / "study.json"
        save_study(study, path)
        loaded = load_study(path)
        assert loaded.operator_key == study.operator_key
        assert [q.qid for q in loaded.queries] == [q.qid for q in study.queries]

    def test_save_is_byte_stable(self, study_tree, tmp_path):
        study = make_study(study_tree)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_study(study, a)
        save_study(study, b)
        assert a.read_bytes() == b.read_bytes()


class TestNormalization:
    def test_unflipped_scores_pass_through(self):
        from moirebench.mos.study import MosQuery

        q = MosQuery(judge=0, seq=0, method="m", image="i", flip=False)
        assert [q.normalize(r) for r in (1, 2, 3, 4, 5)] == [1, 2, 3, 4, 5]

    def test_flipped_scores_reverse(self):
        from moirebench.mos.study import MosQuery

        q = MosQuery(judge=0, seq=0, method="m", image="i", flip=True)
        assert [q.normalize(r) for r in (1, 2, 3, 4, 5)] == [5, 4, 3, 2, 1]

    @pytest.mark.parametrize("bad", [0, 6, -1, 3.5, True])
    def test_out_of_range_rejected(self, bad):
        from moirebench.mos.study import MosQuery

        q = MosQuery(judge=0, seq=0, method="m", image="i", flip=False)
        with pytest.raises(ScoreRangeError):
            q.normalize(bad)


class TestRatingsAndExport:
    def rate_all(self, study, store, normalized_score):
        for q in study.queries:
            raw = 6 - normalized_score if q.flip else normalized_score
            store.record(study, q.qid, raw)

    def test_mos_bounds(self, study_tree, tmp_path):
        study = make_study(study_tree, judges=2)
        lo = RatingStore(tmp_path / "lo.jsonl")
        self.rate_all(study, lo, 1)
        assert compute_mos(study, lo) == {"alpha": 6, "beta": 6}  # J*N = 2*3
        hi = RatingStore(tmp_path / "hi.jsonl")
        self.rate_all(study, hi, 5)
        assert compute_mos(study, hi) == {"alpha": 30, "beta": 30}

    def test_double_rating_rejected(self, study_tree, tmp_path):
        study = make_study(study_tree)
        store = RatingStore(tmp_path / "r.jsonl")
        qid = study.queries[0].qid
        store.record(study, qid, 3)
        with pytest.raises(AlreadyRatedError):
            store.record(study, qid, 4)

    def test_unknown_query_rejected(self, study_tree, tmp_path):
        study = make_study(study_tree)
        store = RatingStore(tmp_path / "r.jsonl")
        with pytest.raises(UnknownQueryError):
            store.record(study, "j99-0000", 3)

    def test_log_replay_resumes(self, study_tree, tmp_path):
        study = make_study(study_tree)
        path = tmp_path / "r.jsonl"
        store = RatingStore(path)
        store.record(study, study.queries[0].qid, 4)
        store.record(study, study.queries[1].qid, 2)
        resumed = RatingStore(path)
        assert len(resumed) == 2
        assert resumed.ratings[study.queries[0].qid].score == study.queries[
            0
        ].normalize(4)

    def test_log_lines_have_timestamps_but_export_does_not(
        self, study_tree, tmp_path
    ):
        study = make_study(study_tree)
        path = tmp_path / "r.jsonl"
        store = RatingStore(path)
        store.record(study, study.queries[0].qid, 4)
        line = json.loads(path.read_text().splitlines()[0])
        assert "timestamp" in line
        payload = export_results(study, store)
        assert "timestamp" not in json.dumps(payload)

    def test_export_ranks_descending_with_name_ties(self, study_tree, tmp_path):
        study = make_study(study_tree, judges=1)
        store = RatingStore(tmp_path / "r.jsonl")
        # alpha gets 5s, beta gets 1s
        for q in study.queries:
            target = 5 if q.method == "alpha" else 1
            store.record(study, q.qid, 6 - target if q.flip else target)
        payload = export_results(study, store)
        assert [m["method"] for m in payload["methods"]] == ["alpha", "beta"]
        assert payload["methods"][0]["mos"] == 15
        one = payload["ratings"][0]
        assert set(one) == {"method", "image", "flip", "score", "judge"}

    def test_hand_built_2x2x1_study_exports_mos_10(self, tmp_path):
        # two judges, two images, one method; normalized scores 3,4,1,2
        gt = tmp_path / "gt"
        d = tmp_path / "m"
        os.makedirs(gt)
        os.makedirs(d)
        rng = rng_from(2, "mini")
        for img in ("a", "b"):
            write_png(gt / f"{img}.png", rng.uniform(size=(8, 8, 3)))
            write_png(d / f"{img}.png", rng.uniform(size=(8, 8, 3)))
        study = create_study({"only": str(d)}, str(gt), ["a", "b"], judges=2, seed=3)
        assert len(study.queries) == 4
        store = RatingStore(tmp_path / "r.jsonl")
        for q, target in zip(study.queries, (3, 4, 1, 2)):
            store.record(study, q.qid, 6 - target if q.flip else target)
        payload = export_results(study, store)
        assert payload["methods"][0]["mos"] == 10
        assert sorted(r["score"] for r in payload["ratings"]) == [1, 2, 3, 4]


class TestService:
    def make_app(self, study_tree, tmp_path, judges=2):
        study = make_study(study_tree, judges=judges)
        return study, create_app(study, ratings_path=tmp_path / "svc.jsonl")

    def test_study_endpoint_exposes_counts_only(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        body = TestClient(app).get("/api/study").json()
        assert body == {
            "judges": 2,
            "queries_per_judge": 6,
            "methods": 2,
            "images": 3,
        }

    def test_no_response_leaks_identities_before_export(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        client = TestClient(app)
        blobs = [
            json.dumps(client.get("/api/study").json()),
            json.dumps(client.get("/api/judge/0/next").json()),
            json.dumps(client.get("/api/progress").json()),
        ]
        for blob in blobs:
            for name in list(study.methods) + study.images:
                assert name not in blob
            assert "flip" not in blob

    def test_next_serves_tokens_and_rating_advances(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        client = TestClient(app)
        first = client.get("/api/judge/0/next").json()
        assert first["left"].startswith("/api/image/")
        img = client.get(first["left"])
        assert img.status_code == 200
        assert img.headers["content-type"] == "image/png"
        assert "content-disposition" not in img.headers
        ok = client.post(
            "/api/judge/0/rating", json={"qid": first["qid"], "score": 4}
        )
        assert ok.status_code == 200
        second = client.get("/api/judge/0/next").json()
        assert second["qid"] != first["qid"]

    def test_error_codes(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        client = TestClient(app)
        q = study.judge_queries(0)[0]
        assert client.get("/api/image/deadbeef").status_code == 404
        assert client.get("/api/judge/9/next").status_code == 404
        assert (
            client.post("/api/judge/0/rating", json={"qid": "j00-9999", "score": 3})
        ).status_code == 404
        assert (
            client.post("/api/judge/1/rating", json={"qid": q.qid, "score": 3})
        ).status_code == 404  # someone else's query
        assert (
            client.post("/api/judge/0/rating", json={"qid": q.qid, "score": 9})
        ).status_code == 422
        client.post("/api/judge/0/rating", json={"qid": q.qid, "score": 3})
        assert (
            client.post("/api/judge/0/rating", json={"qid": q.qid, "score": 3})
        ).status_code == 409

    def test_export_requires_operator_key(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        client = TestClient(app)
        assert client.get("/api/export").status_code == 403
        assert (
            client.get("/api/export", params={"key": "wrong"})
        ).status_code == 403
        good = client.get(
            "/api/export", headers={"X-Operator-Key": study.operator_key}
        )
        assert good.status_code == 200
        assert {m["method"] for m in good.json()["methods"]} == {"alpha", "beta"}

    def test_progress_counts(self, study_tree, tmp_path):
        study, app = self.make_app(study_tree, tmp_path)
        client = TestClient(app)
        q = study.judge_queries(1)[0]
        client.post("/api/judge/1/rating", json={"qid": q.qid, "score": 2})
        body = client.get("/api/progress").json()
        assert body["answered"] == 1
        assert body["total"] == 12
        assert body["judges"][1]["answered"] == 1

    def test_restart_resumes_from_log(self, study_tree, tmp_path):
        study = make_study(study_tree)
        log = tmp_path / "svc.jsonl"
        client = TestClient(create_app(study, ratings_path=log))
        q = study.judge_queries(0)[0]
        client.post("/api/judge/0/rating", json={"qid": q.qid, "score": 5})
        fresh = TestClient(create_app(study, ratings_path=log))
        assert fresh.get("/api/progress").json()["answered"] == 1
        assert (
            fresh.post("/api/judge/0/rating", json={"qid": q.qid, "score": 5})
        ).status_code == 409

    def test_tokens_differ_across_judges_for_same_pair(self, study_tree, tmp_path):
        study = make_study(study_tree)
        t0 = image_token(study.seed, study.queries[0].qid, "left")
        t1 = image_token(study.seed, study.queries[1].qid, "left")
        assert t0 != t1
        assert len(t0) == 32

    def test_missing_image_fails_startup(self, study_tree, tmp_path):
        methods, gt, images, root = study_tree
        study = make_study(study_tree)
        os.remove(os.path.join(methods["alpha"], images[0] + ".png"))
        with pytest.raises(StudyError, match="missing"):
            create_app(study, ratings_path=tmp_path / "x.jsonl")

    def test_default_ratings_path(self):
        assert default_ratings_path("/a/b/study.json") == "/a/b/study.ratings.jsonl"
