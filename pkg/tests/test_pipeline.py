import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import reference
from tractopaint.config import LayerParams, StylizationConfig
from tractopaint.exceptions import InvalidInput
from tractopaint.pipeline import (
    fisher_yates,
    format_tracts,
    layer_rng,
    parse_tracts,
    smoothness_metric,
    stylize,
    stylize_layer,
)
from tractopaint.renderer import cell_distances, new_canvas
from tractopaint.tracer import Tract

FINE = LayerParams(1.0, 100.0, 5.0, 50.0)


def stripes_rgb(size=64, period=8.0):
    x = np.arange(size, dtype=float)
    grey = 127.5 + 100 * np.sin(2 * np.pi * x / period)
    return np.repeat(np.tile(grey, (size, 1))[..., None], 3, axis=-1)


def chord_angle_from_vertical(points):
    d = points[-1] - points[0]
    return math.degrees(math.atan2(abs(d[0]), abs(d[1])))


class TestStylizeLayer:
    def test_flat_grey_places_nothing(self):
        img = np.full((100, 100, 3), 127.5)
        canvas = new_canvas(100, 100)
        layer = LayerParams(10, 1000, 50, 100)
        dist, _, _ = cell_distances(img, canvas.pixels, layer.stroke_width)
        assert np.all(dist > 100) and dist.min() == pytest.approx(math.sqrt(3) * 127.5)
        records = stylize_layer(img, canvas, layer, StylizationConfig(), layer_rng(0, 0))
        assert records == []
        assert np.all(canvas.pixels == 255.0)

    def test_already_painted(self):
        img = np.full((40, 40, 3), 255.0)
        canvas = new_canvas(40, 40)
        assert stylize_layer(img, canvas, FINE, StylizationConfig(), layer_rng(0, 0)) == []

    def test_vertical_stripes(self):
        img = stripes_rgb()
        canvas = new_canvas(64, 64)
        records = stylize_layer(img, canvas, FINE, StylizationConfig(), layer_rng(1, 0))
        assert len(records) > 20
        for rec in records:
            if rec.tract.arc_length > 5:
                assert chord_angle_from_vertical(rec.canvas_points) <= 5.0

    def test_gating_and_provenance(self, photo_path):
        from tractopaint.imagecore import read_image

        img = read_image(photo_path)[64:192, 64:192]
        cfg = StylizationConfig(rng_seed=3)
        canvas = new_canvas(128, 128, cfg.background)
        for index, layer in enumerate(cfg.layers):
            snapshot = canvas.snapshot()
            dist, _, _ = cell_distances(img, snapshot, layer.stroke_width)
            records = stylize_layer(img, canvas, layer, cfg, layer_rng(cfg.rng_seed, index), index)
            cells = [rec.cell for rec in records]
            assert len(cells) == len(set(cells))
            for rec in records:
                assert dist[rec.cell] > layer.color_threshold
                assert rec.layer == index
                assert rec.stroke.width == layer.stroke_width
                assert rec.tract.arc_length <= layer.stroke_length + cfg.error_tol

    def test_canvas_shape_mismatch(self):
        with pytest.raises(InvalidInput):
            stylize_layer(np.zeros((4, 4, 3)), new_canvas(5, 4), FINE, StylizationConfig(), layer_rng(0, 0))

    def test_image_smaller_than_cell(self):
        img = stripes_rgb(size=8)
        canvas = new_canvas(8, 8)
        records = stylize_layer(img, canvas, LayerParams(1, 20, 50, 10), StylizationConfig(), layer_rng(0, 0))
        assert len(records) <= 1
        assert all(rec.cell == (0, 0) for rec in records)


class TestStylize:
    def test_zero_layers(self):
        img = stripes_rgb(16)
        canvas, records = stylize(img, StylizationConfig(layers=(), background=(1, 2, 3)))
        assert records == []
        assert np.all(canvas.pixels == (1, 2, 3))

    def test_layers_in_order(self):
        img = stripes_rgb(64)
        _, records = stylize(img, StylizationConfig(rng_seed=2))
        layers = [rec.layer for rec in records]
        assert layers == sorted(layers)

    def test_deterministic(self):
        img = reference.stripes_noise_image(64)
        cfg = StylizationConfig(rng_seed=9)
        a, ra = stylize(img, cfg)
        b, rb = stylize(img, cfg)
        assert a.pixels.tobytes() == b.pixels.tobytes()
        assert len(ra) == len(rb)
        assert all(x.tract.points.tobytes() == y.tract.points.tobytes() for x, y in zip(ra, rb))

    def test_seed_changes_order(self):
        img = reference.stripes_noise_image(64)
        _, ra = stylize(img, StylizationConfig(rng_seed=1))
        _, rb = stylize(img, StylizationConfig(rng_seed=2))
        assert [r.cell for r in ra] != [r.cell for r in rb]

    @pytest.mark.parametrize(
        "changes",
        [
            {"resize_mode": "blur_only"},
            {"length_space": "original"},
            {"bidirectional": False},
            {"seed_jitter": True},
            {"field_kind": "gradient"},
        ],
    )
    def test_options_run(self, changes):
        img = reference.stripes_noise_image(48)
        cfg = StylizationConfig(layers=(LayerParams(2, 40, 6, 50), FINE), rng_seed=4, **changes)
        canvas, records = stylize(img, cfg)
        assert records
        for rec in records:
            pts = rec.canvas_points
            assert np.all((pts >= 0) & (pts <= 47))


@given(st.lists(st.integers(), max_size=50), st.integers(0, 2**32))
def test_fisher_yates_is_permutation(items, seed):
    out = fisher_yates(items, np.random.default_rng(seed))
    assert sorted(out) == sorted(items)


def test_layer_streams_differ():
    a = layer_rng(7, 0).integers(0, 2**62, 4)
    b = layer_rng(7, 1).integers(0, 2**62, 4)
    c = layer_rng(7, 0).integers(0, 2**62, 4)
    assert not np.array_equal(a, b) and np.array_equal(a, c)


class TestSmoothness:
    def test_straight(self):
        tracts = [Tract([(0, 0), (1, 0), (2, 0), (5, 0)]), Tract([(0, 0), (1, 1), (2, 2)])]
        assert smoothness_metric(tracts) == 0.0

    def test_right_angle(self):
        assert smoothness_metric([Tract([(0, 0), (1, 0), (1, 1)])]) == pytest.approx(math.pi / 2)

    def test_three_unit_segments_one_bend(self):
        # turning angles (pi/2, 0), mean segment length 1
        value = smoothness_metric([Tract([(0, 0), (1, 0), (1, 1), (1, 2)])])
        assert value == pytest.approx(math.pi / 4)

    def test_short_tracts_ignored(self):
        with pytest.raises(InvalidInput):
            smoothness_metric([Tract([(0, 0), (1, 0)])])
        assert smoothness_metric([Tract([(0, 0), (9, 0)]), Tract([(0, 0), (2, 0), (2, 2)])]) == pytest.approx(
            math.pi / 4
        )

    def test_structure_tensor_smoother_than_gradient(self):
        img = reference.stripes_noise_image(96)
        cfg = StylizationConfig(layers=(FINE,), rng_seed=5)
        _, st_records = stylize(img, cfg)
        _, grad_records = stylize(img, cfg.replace(field_kind="gradient"))
        assert smoothness_metric(st_records) < smoothness_metric(grad_records)


def test_tract_dump_roundtrip():
    img = stripes_rgb(32)
    _, records = stylize(img, StylizationConfig(layers=(FINE,)))
    parsed = parse_tracts(format_tracts(records))
    assert len(parsed) == len(records)
    for got, rec in zip(parsed, records):
        assert np.allclose(got, rec.canvas_points, atol=1e-4)
