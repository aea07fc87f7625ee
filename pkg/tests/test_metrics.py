"""Full-reference metrics, reports, and ranking."""

import math

import numpy as np
import pytest

from moirebench.errors import DimensionMismatchError, ImageValueError
from moirebench.metrics import (
    PSNR_CAP_DB,
    EvaluationReport,
    ScorePair,
    format_leaderboard,
    format_report,
    leaderboard,
    psnr,
    ssim,
)
from moirebench.seeding import rng_from

from reference_impl import psnr_reference, ssim_constant_reference


def u8(seed, shape=(64, 64, 3)):
    return rng_from(seed, "metrics").integers(0, 256, size=shape).astype(np.uint8)


class TestPsnr:
    def test_identical_hits_cap(self):
        img = u8(1)
        assert psnr(img, img) == PSNR_CAP_DB

    def test_uniform_offset_closed_form(self):
        a = np.full((32, 32, 3), 100, dtype=np.uint8)
        b = np.full((32, 32, 3), 116, dtype=np.uint8)
        # MSE = 256 -> 20 log10(255/16) = 24.0484039556...
        assert psnr(a, b) == pytest.approx(20 * math.log10(255 / 16), abs=1e-12)

    def test_symmetry(self):
        a, b = u8(2), u8(3)
        assert psnr(a, b) == psnr(b, a)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_reference(self, seed):
        a, b = u8(seed), u8(seed + 100)
        assert psnr(a, b) == pytest.approx(psnr_reference(a, b), abs=1e-10)

    def test_monotone_in_offset(self):
        base = np.full((16, 16, 3), 60, dtype=np.uint8)
        vals = [psnr(base, base + np.uint8(d)) for d in (2, 4, 8, 16, 32)]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            psnr(u8(1), u8(1, shape=(32, 32, 3)))

    def test_float_input_rejected(self):
        with pytest.raises(ImageValueError):
            psnr(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))


class TestSsim:
    def test_identity_is_one(self):
        img = u8(4)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_symmetry(self, seed):
        a, b = u8(seed, (32, 32)), u8(seed + 50, (32, 32))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-9)

    def test_constant_offset_closed_form(self):
        a = np.full((32, 32), 100, dtype=np.uint8)
        b = np.full((32, 32), 110, dtype=np.uint8)
        assert ssim(a, b) == pytest.approx(ssim_constant_reference(100, 110), abs=1e-9)

    def test_bounded_above_by_one(self):
        a, b = u8(5), u8(6)
        assert ssim(a, b) <= 1.0

    def test_degradation_lowers_score(self):
        img = u8(7)
        noisy = np.clip(
            img.astype(int) + rng_from(8, "m").integers(-40, 41, img.shape), 0, 255
        ).astype(np.uint8)
        assert ssim(img, noisy) < ssim(img, img)

    def test_minimum_size_enforced(self):
        small = np.zeros((8, 8), dtype=np.uint8)
        with pytest.raises(ImageValueError):
            ssim(small, small)

    def test_rgb_is_channel_mean(self):
        a, b = u8(9), u8(10)
        per_channel = [ssim(a[..., c], b[..., c]) for c in range(3)]
        assert ssim(a, b) == pytest.approx(np.mean(per_channel), abs=1e-12)


def _report(name, p, s):
    return EvaluationReport(
        name=name,
        split="test",
        overall=ScorePair(psnr=p, ssim=s),
        per_class={},
        per_image=[],
    )


class TestLeaderboard:
    def test_ranks_by_psnr_descending(self):
        reports = {
            "c": _report("c", 39.54, 0.97),
            "a": _report("a", 44.07, 0.99),
            "b": _report("b", 41.84, 0.98),
        }
        rows = leaderboard(reports)
        assert [r.name for r in rows] == ["a", "b", "c"]
        assert [r.rank for r in rows] == [1, 2, 3]

    def test_psnr_tie_breaks_by_ssim_then_name(self):
        reports = {
            "beta": _report("beta", 40.0, 0.95),
            "alpha": _report("alpha", 40.0, 0.95),
            "gamma": _report("gamma", 40.0, 0.97),
        }
        rows = leaderboard(reports)
        assert [r.name for r in rows] == ["gamma", "alpha", "beta"]

    def test_mos_ranking_requires_scores(self):
        reports = {"a": _report("a", 40.0, 0.9)}
        with pytest.raises(ImageValueError):
            leaderboard(reports, rank_key="mos")

    def test_mos_ranking(self):
        reports = {"a": _report("a", 30.0, 0.8), "b": _report("b", 40.0, 0.9)}
        rows = leaderboard(reports, rank_key="mos", mos_scores={"a": 400, "b": 300})
        assert [r.name for r in rows] == ["a", "b"]
        assert rows[0].mos == 400

    def test_format_includes_mos_column_when_present(self):
        reports = {"a": _report("a", 30.0, 0.8)}
        rows = leaderboard(reports, mos_scores={"a": 123})
        assert "MOS" in format_leaderboard(rows)


class TestReportFormat:
    def test_json_roundtrip(self):
        rep = EvaluationReport(
            name="x",
            split="test",
            overall=ScorePair(psnr=30.0, ssim=0.9),
            per_class={"TextOnly": {"count": 2, "psnr": 31.0, "ssim": 0.91}},
            per_image=[{"id": "test_00000", "content_class": "TextOnly",
                        "psnr": 31.0, "ssim": 0.91}],
        )
        back = EvaluationReport.from_json(rep.to_json())
        assert back.overall.psnr == rep.overall.psnr
        assert back.per_class == rep.per_class

    def test_table_rows_are_tagged_by_class(self):
        rep = EvaluationReport(
            name="x",
            split="test",
            overall=ScorePair(psnr=30.0, ssim=0.9),
            per_class={
                "TextOnly": {"count": 1, "psnr": 31.0, "ssim": 0.91},
                "FigureOnly": {"count": 1, "psnr": 29.0, "ssim": 0.89},
                "Mixed": {"count": 1, "psnr": 30.0, "ssim": 0.90},
            },
            per_image=[],
        )
        table = format_report(rep)
        assert "T (TextOnly)" in table
        assert "F (FigureOnly)" in table
        assert "M (Mixed)" in table
