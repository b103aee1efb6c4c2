import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sftok.aggregator import PathwayConfig, token_count
from sftok.budget import CSV_HEADER, SweepSpec, plan, rows_to_csv, sweep
from sftok.errors import InvalidSpec

from .oracles import slowfast_tokens

TABLE4_STRIDES = {"10x24x24": (10, 1, 1), "10x12x24": (10, 2, 1), "10x12x12": (10, 2, 2),
                  "5x24x24": (5, 1, 1), "5x12x24": (5, 2, 1), "5x12x12": (5, 2, 2)}


class TestPlan:
    def test_default_fits_extended_context(self):
        r = plan(PathwayConfig(), 24, 24, 8192, 512)
        assert (r.visual_tokens, r.margin, r.fits) == (3680, 4000, True)

    def test_default_overflows_native_context(self):
        r = plan(PathwayConfig(), 24, 24, 4096, 512)
        assert (r.visual_tokens, r.margin, r.fits) == (3680, -96, False)

    def test_fast_only_225_frames(self):
        r = plan(PathwayConfig(n_frames=225), 24, 24, 8192, 512, mode="fast_only")
        assert r.visual_tokens == 225 * 4 * 4 == 3600
        assert r.fits

    def test_slow_only(self):
        assert plan(PathwayConfig(), mode="slow_only").visual_tokens == 2880

    def test_exact_fit(self):
        r = plan(PathwayConfig(), context_limit=3680 + 512)
        assert r.margin == 0 and r.fits

    def test_report_dict(self):
        d = plan(PathwayConfig()).to_dict()
        assert d == {"visual_tokens": 3680, "reserved_text_tokens": 512,
                     "context_limit": 8192, "margin": 4000, "fits": True}

    def test_bad_limit(self):
        with pytest.raises(ValueError):
            plan(PathwayConfig(), context_limit=0)

    @given(st.integers(1, 20000), st.integers(0, 5000), st.integers(0, 2000))
    def test_monotone_in_limit(self, limit, extra, reserved):
        cfg = PathwayConfig()
        a = plan(cfg, context_limit=limit, reserved_text_tokens=reserved)
        b = plan(cfg, context_limit=limit + extra, reserved_text_tokens=reserved)
        assert not (a.fits and not b.fits)
        assert a.margin == limit - a.visual_tokens - reserved
        assert a.fits == (a.margin >= 0)


class TestSweep:
    def test_fast_only_frames(self):
        spec = SweepSpec(mode="fast_only", n_frames=[50, 100, 125, 150, 175, 200, 225])
        counts = [r.visual_tokens for r in sweep(spec)]
        assert counts == [n * 4 * 4 for n in (50, 100, 125, 150, 175, 200, 225)]
        assert counts == [800, 1600, 2000, 2400, 2800, 3200, 3600]

    def test_table4_slow_shapes(self):
        expected = {}
        for shape, (ns, sh, sw) in TABLE4_STRIDES.items():
            n, h, w = map(int, shape.split("x"))
            expected[shape] = n * h * w
            rows = sweep(SweepSpec(mode="slow_only", n_slow=[ns], slow_strides=[(sh, sw)]))
            assert rows[0].descriptor == shape
            assert rows[0].visual_tokens == expected[shape]
        assert list(expected.values()) == [5760, 2880, 1440, 2880, 1440, 720]

    def test_comparison_pair(self):
        fast = sweep(SweepSpec(mode="fast_only", n_frames=[200]))
        sf = sweep(SweepSpec(mode="slowfast", n_slow=[8]))
        assert (fast[0].visual_tokens, sf[0].visual_tokens) == (3200, 3104)

    def test_cross_product_order(self):
        spec = SweepSpec(n_slow=[2, 1], slow_strides=[(2, 1), (1, 1)], fast_outs=[(4, 4), (1, 1)])
        rows = sweep(spec)
        assert len(rows) == 8
        keys = [(r.config.n_slow, r.config.slow_stride, r.config.fast_out) for r in rows]
        assert keys[:3] == [(2, (2, 1), (4, 4)), (2, (2, 1), (1, 1)), (2, (1, 1), (4, 4))]

    @given(
        st.lists(st.integers(12, 80), min_size=1, max_size=4),
        st.lists(st.integers(1, 12), min_size=1, max_size=3),
        st.lists(st.sampled_from([(1, 1), (2, 1), (2, 2), (3, 4)]), min_size=1, max_size=3),
        st.lists(st.sampled_from([(1, 1), (4, 4), (3, 8), (8, 8)]), min_size=1, max_size=3),
    )
    def test_length_and_counts(self, frames, slows, strides, outs):
        spec = SweepSpec("slowfast", frames, slows, strides, outs)
        rows = sweep(spec)
        assert len(rows) == math.prod(spec.axis_lengths())
        for r in rows:
            c = r.config
            assert r.visual_tokens == slowfast_tokens(
                c.n_slow, 24, 24, c.slow_stride_h, c.slow_stride_w, c.n_frames, c.fast_out_h, c.fast_out_w
            )

    def test_empty_axis(self):
        with pytest.raises(InvalidSpec):
            SweepSpec(n_frames=[])

    def test_unused_axis_rejected(self):
        with pytest.raises(InvalidSpec):
            SweepSpec(mode="fast_only", n_slow=[4, 8])

    def test_invalid_cell(self):
        with pytest.raises(InvalidSpec):
            sweep(SweepSpec(n_frames=[4], n_slow=[10]))

    def test_csv(self):
        rows = sweep(SweepSpec(mode="fast_only", n_frames=[50, 500]), context_limit=8192)
        text = rows_to_csv(rows)
        parsed = list(csv.reader(io.StringIO(text)))
        assert parsed[0] == CSV_HEADER
        assert parsed[1] == ["fast_only", "50", "0", "4", "4", "800", "true"]
        assert parsed[2] == ["fast_only", "500", "0", "4", "4", "8000", "false"]

    def test_csv_slowfast_row(self):
        text = rows_to_csv(sweep(SweepSpec()))
        assert text.splitlines()[1] == "slowfast,50,10,4,4,3680,true"

    def test_spec_json(self, tmp_path):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"sweep": {"mode": "slow_only", "n_slow": [10, 5],
                                              "slow_strides": ["1x1", [2, 1], "2x2"]}}))
        spec = SweepSpec.load(path)
        assert spec.slow_strides == [(1, 1), (2, 1), (2, 2)]
        assert [r.visual_tokens for r in sweep(spec)] == [5760, 2880, 1440, 2880, 1440, 720]
        assert SweepSpec.from_dict(spec.to_dict()) == spec

    @pytest.mark.parametrize("bad", [{"mode": "both"}, {"n_frames": 50}, {"fast_outs": ["4by4"]},
                                     {"bogus": [1]}, {"n_slow": ["8"]}])
    def test_bad_spec_json(self, bad):
        with pytest.raises(InvalidSpec):
            SweepSpec.from_dict(bad)

    def test_rows_agree_with_token_count(self):
        for r in sweep(SweepSpec(n_slow=[1, 2, 4, 6, 8, 10])):
            assert r.visual_tokens == token_count(r.config)
