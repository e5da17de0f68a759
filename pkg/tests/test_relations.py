import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import classify_reference
from sceneforge.errors import OutOfRange, UnparsableInstruction
from sceneforge.relations import (
    PRED_CODE,
    PREDICATES,
    Instance,
    Relation,
    classify_codes,
    classify_pair,
    derive_relations,
    parse_instruction,
    relation_satisfied,
    render_instruction,
)
from sceneforge.types import BBox, DepthMap


class TestClassifyPair:
    def test_depth_beats_planar_offsets(self):
        # Big planar separation, but the depth gap dominates.
        assert classify_pair((0.1, 0.1), 0.9, (0.9, 0.9), 0.2) == "in_front_of"
        assert classify_pair((0.1, 0.1), 0.2, (0.9, 0.9), 0.9) == "behind"

    def test_vertical_beats_horizontal_on_tie(self):
        # |dy| == |dx| and both above threshold: vertical wins.
        assert classify_pair((0.3, 0.3), 0.5, (0.5, 0.5), 0.5) == "above"
        assert classify_pair((0.7, 0.7), 0.5, (0.5, 0.5), 0.5) == "below"

    def test_horizontal(self):
        assert classify_pair((0.2, 0.5), 0.5, (0.6, 0.5), 0.5) == "left_of"
        assert classify_pair((0.9, 0.5), 0.5, (0.6, 0.5), 0.5) == "right_of"

    def test_near_when_everything_below_threshold(self):
        assert classify_pair((0.51, 0.52), 0.5, (0.5, 0.5), 0.55) == "near"

    def test_above_means_smaller_y(self):
        # Image origin is top-left: above = smaller y coordinate.
        assert classify_pair((0.5, 0.2), 0.5, (0.5, 0.6), 0.5) == "above"

    def test_depth_threshold_boundary_inclusive(self):
        assert classify_pair((0.5, 0.5), 0.65, (0.5, 0.5), 0.5) == "in_front_of"
        assert classify_pair((0.5, 0.5), 0.649, (0.5, 0.5), 0.5) == "near"

    def test_planar_threshold_boundary_inclusive(self):
        assert classify_pair((0.55, 0.5), 0.5, (0.5, 0.5), 0.5) == "right_of"
        assert classify_pair((0.549, 0.5), 0.5, (0.5, 0.5), 0.5) == "near"

    def test_custom_thresholds(self):
        assert classify_pair((0.5, 0.5), 0.58, (0.5, 0.5), 0.5,
                             tau_d=0.05) == "in_front_of"
        assert classify_pair((0.52, 0.5), 0.5, (0.5, 0.5), 0.5,
                             tau_xy=0.01) == "right_of"

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1),
           st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=300, deadline=None)
    def test_matches_reference(self, tx, ty, td, ax, ay, ad):
        got = classify_pair((tx, ty), td, (ax, ay), ad)
        assert got == classify_reference((tx, ty), td, (ax, ay), ad, 0.15, 0.05)

    def test_front_behind_antisymmetric(self):
        rng = np.random.default_rng(5)
        flipped = {"in_front_of": "behind", "behind": "in_front_of",
                   "left_of": "right_of", "right_of": "left_of",
                   "above": "below", "below": "above", "near": "near"}
        for _ in range(500):
            t = (float(rng.random()), float(rng.random()))
            a = (float(rng.random()), float(rng.random()))
            td, ad = float(rng.random()), float(rng.random())
            fwd = classify_pair(t, td, a, ad)
            rev = classify_pair(a, ad, t, td)
            # Swapping roles flips the predicate except at exact-boundary
            # ties, where one direction can sit on the inclusive edge.
            dd, dx, dy = td - ad, t[0] - a[0], t[1] - a[1]
            on_tie = (abs(dy) == abs(dx)) or dd == 0 or dx == 0 or dy == 0
            if not on_tie:
                assert rev == flipped[fwd], (t, td, a, ad)


class TestRelationSatisfied:
    def test_positive_and_negative(self):
        assert relation_satisfied("left_of", (0.2, 0.5), 0.5, (0.6, 0.5), 0.5)
        assert not relation_satisfied("right_of", (0.2, 0.5), 0.5, (0.6, 0.5), 0.5)


class TestClassifyCodes:
    def test_matches_scalar_classifier_on_grid(self):
        rng = np.random.default_rng(7)
        cx = rng.random((4, 5, 6))
        cy = rng.random((4, 5, 6))
        d = rng.random((4, 5, 6))
        a_cx, a_cy, a_d = 0.5, 0.45, 0.55
        codes = classify_codes(cx, cy, d, a_cx, a_cy, a_d)
        for idx in np.ndindex(codes.shape):
            want = classify_pair((cx[idx], cy[idx]), d[idx], (a_cx, a_cy), a_d)
            assert PREDICATES[codes[idx]] == want, idx

    def test_broadcasting(self):
        cx = np.linspace(0, 1, 8).reshape(1, 8)
        cy = np.linspace(0, 1, 5).reshape(5, 1)
        d = np.float64(0.5)
        codes = classify_codes(cx, cy, d, 0.5, 0.5, 0.5)
        assert codes.shape == (5, 8)
        for i in range(5):
            for j in range(8):
                want = classify_pair((float(cx[0, j]), float(cy[i, 0])), 0.5,
                                     (0.5, 0.5), 0.5)
                assert PREDICATES[codes[i, j]] == want

    def test_code_table_order(self):
        assert [PREDICATES[PRED_CODE[p]] for p in PREDICATES] == list(PREDICATES)


class TestRelationType:
    def test_json_round_trip(self):
        r = Relation("a", "behind", "b")
        assert Relation.from_json(r.to_json()) == r

    def test_self_relation_rejected(self):
        with pytest.raises(OutOfRange):
            Relation("a", "near", "a")

    def test_unknown_predicate_rejected(self):
        with pytest.raises(OutOfRange):
            Relation("a", "inside", "b")


class TestDeriveRelations:
    def test_reads_depth_at_box_centers(self):
        # Rows 0..9 have depth row/9; the target sits high (near row 2),
        # anchors sit low (near row 7): target is behind both.
        depth = DepthMap((np.arange(10, dtype=np.float32) / 9)[:, None]
                         * np.ones((1, 10), dtype=np.float32))
        target = Instance("t", "cup", BBox(0.1, 0.1, 0.5, 0.35))
        anchors = [Instance("a1", "plate", BBox(0.1, 0.6, 0.5, 0.9)),
                   Instance("a2", "fork", BBox(0.5, 0.6, 0.9, 0.9))]
        rels = derive_relations(target, anchors, depth)
        assert [r.predicate for r in rels] == ["behind", "behind"]
        assert [r.anchor for r in rels] == ["a1", "a2"]
        assert all(r.subject == "t" for r in rels)

    def test_explicit_target_depth_overrides_map(self):
        depth = DepthMap(np.full((10, 10), 0.5, dtype=np.float32))
        target = Instance("t", "cup", BBox(0.1, 0.1, 0.3, 0.3))
        anchor = [Instance("a", "plate", BBox(0.6, 0.6, 0.9, 0.9))]
        rels = derive_relations(target, anchor, depth, target_depth=0.9)
        assert rels[0].predicate == "in_front_of"

    def test_one_relation_per_anchor(self):
        depth = DepthMap(np.full((10, 10), 0.5, dtype=np.float32))
        target = Instance("t", "cup", BBox(0.4, 0.4, 0.6, 0.6))
        anchors = [Instance(f"a{i}", "x", BBox(0.05 * i + 0.01, 0.7,
                                               0.05 * i + 0.05, 0.9))
                   for i in range(4)]
        assert len(derive_relations(target, anchors, depth)) == 4


class TestInstructionTemplate:
    NAMES = {"a1": "sofa", "a2": "lamp"}

    def rels(self):
        return [Relation("t", "left_of", "a1"), Relation("t", "behind", "a2")]

    def test_render_contains_all_names(self):
        text = render_instruction("cat", self.rels(), self.NAMES, seed=3)
        for name in ("cat", "sofa", "lamp"):
            assert name in text
        assert text.endswith(".")

    def test_render_deterministic(self):
        a = render_instruction("cat", self.rels(), self.NAMES, seed=11)
        b = render_instruction("cat", self.rels(), self.NAMES, seed=11)
        assert a == b

    def test_seed_varies_verb(self):
        texts = {render_instruction("cat", self.rels(), self.NAMES, seed=s)
                 for s in range(16)}
        assert len(texts) > 1

    def test_round_trip(self):
        for seed in range(8):
            text = render_instruction("cat", self.rels(), self.NAMES, seed=seed)
            target, pairs = parse_instruction(text)
            assert target == "cat"
            assert pairs == [("left_of", "sofa"), ("behind", "lamp")]

    def test_round_trip_all_predicates(self):
        for pred in PREDICATES:
            text = render_instruction("cat", [Relation("t", pred, "a1")],
                                      self.NAMES, seed=0)
            _, pairs = parse_instruction(text)
            assert pairs == [(pred, "sofa")]

    def test_paraphraser_hook_applied(self):
        class Shouty:
            def paraphrase(self, text, seed):
                return text.upper()

        text = render_instruction("cat", self.rels(), self.NAMES, seed=0,
                                  paraphraser=Shouty())
        assert text == text.upper()

    def test_render_requires_relations(self):
        with pytest.raises(OutOfRange):
            render_instruction("cat", [], self.NAMES, seed=0)


class TestParseInstruction:
    def test_synonyms(self):
        cases = {
            "Put the mug over the shelf.": ("above", "shelf"),
            "Place the mug under the shelf.": ("below", "shelf"),
            "Place the mug underneath the shelf.": ("below", "shelf"),
            "Insert the mug next to the shelf.": ("near", "shelf"),
            "Position the mug left of the shelf.": ("left_of", "shelf"),
            "put the mug IN FRONT OF the shelf": ("in_front_of", "shelf"),
        }
        for text, want in cases.items():
            target, pairs = parse_instruction(text)
            assert target == "mug"
            assert pairs == [want]

    def test_multi_relation_with_commas(self):
        text = "Place the dog to the right of the car, and near the tree."
        target, pairs = parse_instruction(text)
        assert target == "dog"
        assert pairs == [("right_of", "car"), ("near", "tree")]

    def test_articles_accepted(self):
        target, pairs = parse_instruction("Place a vase near an orchid.")
        assert target == "vase"
        assert pairs == [("near", "orchid")]

    def test_multiword_names(self):
        text = "Place the coffee mug to the left of the desk lamp."
        target, pairs = parse_instruction(text)
        assert target == "coffee mug"
        assert pairs == [("left_of", "desk lamp")]

    def test_unparsable(self):
        for text in ("hello world", "Move the cat sideways.",
                     "Place the cat.", ""):
            with pytest.raises(UnparsableInstruction):
                parse_instruction(text)
