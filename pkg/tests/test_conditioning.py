import numpy as np
import pytest

from oracles import cfg_reference
from sceneforge.bundle import (
    ConditioningBundle,
    DroppedFlags,
    GuidanceArrays,
    assemble_bundle,
    bundle_from_wire,
    bundle_to_wire,
    cfg_combine,
    combine_control_maps,
    drop_conditions,
    load_bundle,
    save_bundle,
)
from sceneforge.detail import HFMap
from sceneforge.errors import (
    DimensionMismatch,
    InvalidBundle,
    NonFiniteSample,
    ShapeMismatch,
)
from sceneforge.fusion import FusionRequest, fuse
from sceneforge.types import BBox, DepthMap, Location25D, Mask, Raster


def make_fusion(w=512, h=512, box=BBox(0.25, 0.25, 0.75, 0.75), depth=0.9):
    bg = DepthMap(np.full((h, w), 0.2, dtype=np.float32))
    obj = DepthMap(np.full((64, 64), 0.5, dtype=np.float32))
    mask = Mask(np.ones((64, 64), dtype=np.uint8))
    return fuse(FusionRequest(bg_depth=bg, obj_depth=obj, obj_mask=mask,
                              location=Location25D(bbox=box, depth=depth)))


def make_bundle(seed=0, size=512, bundle_id=""):
    rng = np.random.default_rng(seed)
    scene = Raster(rng.integers(0, 256, (size, size, 3), dtype=np.uint8))
    box = BBox(0.25, 0.25, 0.75, 0.75)
    fusion = make_fusion(size, size, box)
    collage = Raster(rng.integers(0, 256, (size, size, 3), dtype=np.uint8))
    ref = Raster(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8))
    return assemble_bundle(scene, fusion, collage, ref, lam=1.5, s=3.0,
                           location=Location25D(bbox=box, depth=0.9),
                           mode="place", bundle_id=bundle_id)


class TestAssembleBundle:
    def test_masked_scene_zeroing_bit_exact(self):
        rng = np.random.default_rng(1)
        scene_arr = rng.integers(1, 256, (512, 512, 3), dtype=np.uint8)
        scene = Raster(scene_arr)
        box = BBox(0.25, 0.25, 0.75, 0.75)
        fusion = make_fusion(box=box)
        collage = Raster(np.zeros((512, 512, 3), dtype=np.uint8))
        ref = Raster(np.zeros((32, 32, 3), dtype=np.uint8))
        b = assemble_bundle(scene, fusion, collage, ref, lam=1.0, s=2.0,
                            location=Location25D(bbox=box, depth=0.9),
                            mode="place")
        # 512-square box on a 512 scene: the working crop is the identity,
        # so the masked scene aligns pixel-for-pixel with the input.
        assert b.crop.side == 512 and b.crop.scale == 1.0
        m = fusion.scene_mask.as_bool()
        assert np.all(b.masked_scene.data[m] == 0)
        assert np.array_equal(b.masked_scene.data[~m], scene_arr[~m])

    def test_crop_geometry_follows_zoom(self):
        rng = np.random.default_rng(2)
        scene = Raster(rng.integers(0, 256, (800, 1000, 3), dtype=np.uint8))
        box = BBox(0.45, 0.4375, 0.55, 0.5625)  # 450,350,550,450 px
        bg = DepthMap(np.zeros((800, 1000), dtype=np.float32))
        fusion = fuse(FusionRequest(
            bg_depth=bg, obj_depth=DepthMap(np.full((8, 8), 0.5, np.float32)),
            obj_mask=Mask(np.ones((8, 8), dtype=np.uint8)),
            location=Location25D(bbox=box, depth=0.5)))
        collage = Raster(np.zeros((800, 1000, 3), dtype=np.uint8))
        ref = Raster(np.zeros((16, 16, 3), dtype=np.uint8))
        b = assemble_bundle(scene, fusion, collage, ref, lam=0.0, s=1.0,
                            location=Location25D(bbox=box, depth=0.5),
                            mode="place")
        assert b.crop.square == (400, 300, 600, 500)
        assert b.crop.scale == pytest.approx(512 / 200)
        assert b.masked_scene.size == (512, 512)
        assert b.collage.size == (512, 512)
        assert b.fused_depth.data.shape == (512, 512)
        assert b.frame_size == (1000, 800)

    def test_frame_mismatch_rejected(self):
        scene = Raster(np.zeros((512, 512, 3), dtype=np.uint8))
        fusion = make_fusion(256, 256)
        collage = Raster(np.zeros((512, 512, 3), dtype=np.uint8))
        ref = Raster(np.zeros((16, 16, 3), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            assemble_bundle(scene, fusion, collage, ref, lam=0.0, s=1.0,
                            location=Location25D(bbox=BBox(0.2, 0.2, 0.8, 0.8),
                                                 depth=0.5),
                            mode="place")

    def test_collage_mismatch_rejected(self):
        scene = Raster(np.zeros((512, 512, 3), dtype=np.uint8))
        fusion = make_fusion()
        collage = Raster(np.zeros((256, 512, 3), dtype=np.uint8))
        ref = Raster(np.zeros((16, 16, 3), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            assemble_bundle(scene, fusion, collage, ref, lam=0.0, s=1.0,
                            location=Location25D(bbox=BBox(0.2, 0.2, 0.8, 0.8),
                                                 depth=0.5),
                            mode="place")

    def test_non_square_reference_rejected(self):
        b = make_bundle()
        with pytest.raises(DimensionMismatch):
            ConditioningBundle(
                masked_scene=b.masked_scene, collage=b.collage,
                fused_depth=b.fused_depth,
                reference_crop=Raster(np.zeros((8, 10, 3), dtype=np.uint8)),
                lam=b.lam, guidance_scale=b.guidance_scale, mode=b.mode,
                dropped=b.dropped, location=b.location, crop=b.crop,
                frame_size=b.frame_size)


class TestCombineControlMaps:
    def test_lambda_zero_is_detail_only(self):
        rng = np.random.default_rng(3)
        detail = HFMap(rng.random((16, 16)).astype(np.float32))
        depth = DepthMap(rng.random((16, 16)).astype(np.float32))
        out = combine_control_maps(detail, depth, 0.0)
        assert np.array_equal(out, detail.data)

    def test_lambda_scales_depth_term(self):
        detail = HFMap(np.full((8, 8), 0.25, dtype=np.float32))
        depth = DepthMap(np.full((8, 8), 0.5, dtype=np.float32))
        out = combine_control_maps(detail, depth, 2.0)
        assert np.allclose(out, 1.25)

    def test_unclamped(self):
        detail = HFMap(np.ones((4, 4), dtype=np.float32))
        depth = DepthMap(np.ones((4, 4), dtype=np.float32))
        assert np.allclose(combine_control_maps(detail, depth, 3.0), 4.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            combine_control_maps(HFMap(np.zeros((4, 4), dtype=np.float32)),
                                 DepthMap(np.zeros((4, 5), dtype=np.float32)),
                                 1.0)


@pytest.fixture(scope="module")
def small_bundle():
    return make_bundle(size=64)


class TestDropConditions:
    def test_rates_within_two_percent(self, small_bundle):
        n = 10_000
        hits = np.zeros(3, dtype=np.int64)
        for i in range(n):
            out = drop_conditions(small_bundle, seed=i)
            hits += (out.dropped.id, out.dropped.detail, out.dropped.depth)
        rates = hits / n
        assert abs(rates[0] - 0.5) < 0.02
        assert abs(rates[1] - 0.3) < 0.02
        assert abs(rates[2] - 0.3) < 0.02

    def test_draws_independent(self, small_bundle):
        n = 10_000
        joint = 0
        for i in range(n):
            out = drop_conditions(small_bundle, seed=i)
            joint += out.dropped.id and out.dropped.detail
        assert abs(joint / n - 0.5 * 0.3) < 0.02

    def test_dropped_payloads_are_zero(self, small_bundle):
        for i in range(50):
            out = drop_conditions(small_bundle, seed=i)
            if out.dropped.id:
                assert np.all(out.reference_crop.data == 0)
            else:
                assert np.array_equal(out.reference_crop.data,
                                      small_bundle.reference_crop.data)
            if out.dropped.detail:
                assert np.all(out.collage.data == 0)
            if out.dropped.depth:
                assert np.all(out.fused_depth.data == 0.0)
            else:
                assert np.array_equal(out.fused_depth.data,
                                      small_bundle.fused_depth.data)

    def test_p_zero_returns_same_object(self, small_bundle):
        for i in range(20):
            assert drop_conditions(small_bundle, p_id=0.0, p_ctrl=0.0,
                                   seed=i) is small_bundle

    def test_p_one_drops_everything(self, small_bundle):
        out = drop_conditions(small_bundle, p_id=1.0, p_ctrl=1.0, seed=7)
        assert out.dropped == DroppedFlags(id=True, detail=True, depth=True)
        assert np.all(out.reference_crop.data == 0)
        assert np.all(out.collage.data == 0)
        assert np.all(out.fused_depth.data == 0.0)

    def test_same_seed_same_flags(self, small_bundle):
        a = drop_conditions(small_bundle, seed=123)
        b = drop_conditions(small_bundle, seed=123)
        assert a.dropped == b.dropped

    def test_bundle_id_decorrelates(self):
        flags = set()
        for bid in ("a", "b", "c", "d", "e", "f", "g", "h"):
            out = drop_conditions(make_bundle(size=64, bundle_id=bid), seed=0)
            flags.add((out.dropped.id, out.dropped.detail, out.dropped.depth))
        assert len(flags) > 1

    def test_bad_probability_rejected(self, small_bundle):
        with pytest.raises(NonFiniteSample):
            drop_conditions(small_bundle, p_id=1.5)
        with pytest.raises(NonFiniteSample):
            drop_conditions(small_bundle, p_ctrl=-0.1)

    def test_untouched_fields_preserved(self, small_bundle):
        out = drop_conditions(small_bundle, p_id=1.0, p_ctrl=0.0, seed=3)
        assert out.lam == small_bundle.lam
        assert out.crop == small_bundle.crop
        assert np.array_equal(out.masked_scene.data,
                              small_bundle.masked_scene.data)


class TestCFG:
    def test_s_one_returns_conditional(self):
        rng = np.random.default_rng(5)
        uc = rng.standard_normal((4, 16, 16)).astype(np.float32)
        c = rng.standard_normal((4, 16, 16)).astype(np.float32)
        out = cfg_combine(GuidanceArrays(uc, c, 1.0))
        assert np.max(np.abs(out - c)) < 1e-12 * max(1.0, np.abs(c).max())

    def test_s_zero_returns_unconditional(self):
        rng = np.random.default_rng(6)
        uc = rng.standard_normal((8, 8))
        c = rng.standard_normal((8, 8))
        out = cfg_combine(GuidanceArrays(uc, c, 0.0))
        assert np.array_equal(out, uc)

    def test_linear_in_s(self):
        rng = np.random.default_rng(7)
        uc = rng.standard_normal((8, 8))
        c = rng.standard_normal((8, 8))
        d1 = cfg_combine(GuidanceArrays(uc, c, 2.0)) - uc
        d2 = cfg_combine(GuidanceArrays(uc, c, 4.0)) - uc
        assert np.allclose(d2, 2.0 * d1, rtol=1e-12, atol=1e-12)

    def test_matches_reference(self):
        rng = np.random.default_rng(8)
        uc = rng.standard_normal((3, 5))
        c = rng.standard_normal((3, 5))
        for s in (0.0, 0.5, 1.0, 2.5, 7.5):
            out = cfg_combine(GuidanceArrays(uc, c, s))
            assert np.allclose(out, cfg_reference(uc, c, s), atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            GuidanceArrays(np.zeros((2, 2)), np.zeros((3, 3)), 1.0)

    def test_non_finite_rejected(self):
        bad = np.array([[np.nan, 0.0]])
        with pytest.raises(NonFiniteSample):
            GuidanceArrays(bad, np.zeros((1, 2)), 1.0)


class TestBundlePersistence:
    def test_save_load_round_trip_bit_exact(self, tmp_path):
        b = make_bundle(seed=11, size=128)
        save_bundle(b, tmp_path / "bundle")
        loaded = load_bundle(tmp_path / "bundle")
        assert np.array_equal(loaded.masked_scene.data, b.masked_scene.data)
        assert np.array_equal(loaded.collage.data, b.collage.data)
        assert np.array_equal(loaded.fused_depth.data, b.fused_depth.data)
        assert np.array_equal(loaded.reference_crop.data, b.reference_crop.data)
        assert loaded.lam == b.lam
        assert loaded.guidance_scale == b.guidance_scale
        assert loaded.mode == b.mode
        assert loaded.dropped == b.dropped
        assert loaded.location == b.location
        assert loaded.crop == b.crop
        assert loaded.frame_size == b.frame_size

    def test_save_is_reproducible_bytes(self, tmp_path):
        b = make_bundle(seed=13, size=64)
        save_bundle(b, tmp_path / "a")
        save_bundle(b, tmp_path / "b")
        for name in ("masked_scene.png", "collage.png", "fused_depth.pfm",
                     "reference.png", "meta.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes(), name

    def test_wire_round_trip_bit_exact(self):
        b = make_bundle(seed=17, size=64, bundle_id="wire-test")
        back = bundle_from_wire(bundle_to_wire(b))
        assert np.array_equal(back.masked_scene.data, b.masked_scene.data)
        assert np.array_equal(back.collage.data, b.collage.data)
        assert np.array_equal(back.fused_depth.data, b.fused_depth.data)
        assert np.array_equal(back.reference_crop.data, b.reference_crop.data)
        assert back.bundle_id == "wire-test"

    def test_wire_preserves_dropped_flags(self):
        b = drop_conditions(make_bundle(seed=19, size=64), p_id=1.0, seed=0)
        back = bundle_from_wire(bundle_to_wire(b))
        assert back.dropped.id

    def test_load_missing_file(self, tmp_path):
        b = make_bundle(size=64)
        out = save_bundle(b, tmp_path / "bundle")
        (out / "collage.png").unlink()
        with pytest.raises(InvalidBundle):
            load_bundle(out)

    def test_load_corrupt_meta(self, tmp_path):
        b = make_bundle(size=64)
        out = save_bundle(b, tmp_path / "bundle")
        meta = (out / "meta.json").read_text()
        (out / "meta.json").write_text(meta.replace('"mode": "place"',
                                                    '"mode": "levitate"'))
        with pytest.raises(InvalidBundle):
            load_bundle(out)

    def test_load_meta_missing_key(self, tmp_path):
        import json
        b = make_bundle(size=64)
        out = save_bundle(b, tmp_path / "bundle")
        meta = json.loads((out / "meta.json").read_text())
        del meta["lambda"]
        (out / "meta.json").write_text(json.dumps(meta))
        with pytest.raises(InvalidBundle):
            load_bundle(out)

    def test_wire_garbage_rejected(self):
        with pytest.raises(InvalidBundle):
            bundle_from_wire({"masked_scene": {"data": "!!"}})
