import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from riskcore.errors import (
    DimensionMismatch,
    EmptyMatrix,
    IndexOutOfRange,
    InvalidConfig,
    NonFiniteValue,
    ShapeMismatch,
)
from riskcore.schema import (
    QuestionnaireSchema,
    QuestionSpec,
    apply_scaling,
    decode_choices,
    encode_response,
    fit_scaling,
    load_schema,
    reference_schema,
    save_schema,
    vector_dimension,
)


class TestSchema:
    def test_dimension_width_rule(self, small_schema):
        assert vector_dimension(small_schema) == 6

    def test_empty_schema(self):
        assert vector_dimension(QuestionnaireSchema(())) == 0

    def test_reference_schema_has_84_factors(self):
        schema = reference_schema()
        assert vector_dimension(schema) == 84
        assert len(schema.factor_names) == 84

    def test_factor_names_follow_widths(self, small_schema):
        names = small_schema.factor_names
        assert len(names) == 6
        assert names[0].startswith("Q1")
        assert names[1].startswith("Q2_1") and names[4].startswith("Q2_4")

    def test_duplicate_ids_rejected(self):
        q = QuestionSpec("A", "a", "fill_in")
        with pytest.raises(InvalidConfig):
            QuestionnaireSchema((q, q))

    @pytest.mark.parametrize("count", [None, 0, 1])
    def test_choice_needs_two_options(self, count):
        with pytest.raises(InvalidConfig):
            QuestionSpec("A", "a", "single_choice", count)

    def test_json_round_trip(self, small_schema, tmp_path):
        path = tmp_path / "schema.json"
        save_schema(small_schema, path)
        assert json.loads(path.read_text())[1] == {
            "id": "Q2", "name": "relatives", "kind": "multi_choice", "option_count": 4}
        assert load_schema(path) == small_schema


class TestEncode:
    def test_single_choice_scalar(self):
        s = QuestionnaireSchema((QuestionSpec("A", "a", "single_choice", 3),))
        assert encode_response(s, [2]).tolist() == [2.0]

    def test_multi_choice_indicators(self):
        s = QuestionnaireSchema((QuestionSpec("A", "a", "multi_choice", 4),))
        assert encode_response(s, [{0, 3}]).tolist() == [1, 0, 0, 1]

    def test_fill_in_verbatim(self):
        s = QuestionnaireSchema((QuestionSpec("A", "a", "fill_in"),))
        assert encode_response(s, [55]).tolist() == [55.0]

    def test_concatenation_order(self, small_schema):
        v = encode_response(small_schema, [1, [2], 61.5])
        assert v.tolist() == [1, 0, 0, 1, 0, 61.5]

    def test_errors(self, small_schema):
        with pytest.raises(ShapeMismatch):
            encode_response(small_schema, [1, [2]])
        with pytest.raises(IndexOutOfRange):
            encode_response(small_schema, [3, [2], 1.0])
        with pytest.raises(IndexOutOfRange):
            encode_response(small_schema, [0, [4], 1.0])
        with pytest.raises(ShapeMismatch):
            encode_response(small_schema, [0, [1, 1], 1.0])
        with pytest.raises(NonFiniteValue):
            encode_response(small_schema, [0, [1], float("nan")])
        with pytest.raises(NonFiniteValue):
            encode_response(small_schema, [0, [1], None])

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_choice_round_trip_and_injective(self, data):
        counts = data.draw(st.lists(st.tuples(st.booleans(), st.integers(2, 5)), min_size=1, max_size=5))
        qs = tuple(QuestionSpec(f"Q{i}", "q", "multi_choice" if multi else "single_choice", k)
                   for i, (multi, k) in enumerate(counts))
        schema = QuestionnaireSchema(qs)

        def draw_response():
            out = []
            for q in qs:
                if q.kind == "multi_choice":
                    out.append(frozenset(data.draw(st.sets(st.integers(0, q.option_count - 1)))))
                else:
                    out.append(data.draw(st.integers(0, q.option_count - 1)))
            return out

        a, b = draw_response(), draw_response()
        va, vb = encode_response(schema, a), encode_response(schema, b)
        assert decode_choices(schema, va) == a
        assert (a == b) == np.array_equal(va, vb)


class TestScaling:
    def test_fit_records_extremes(self):
        p = fit_scaling(np.array([[2.0], [4.0], [6.0]]))
        assert (p.x_max[0], p.x_min[0]) == (6.0, 2.0)
        assert not p.constant[0]

    def test_constant_columns_flagged(self):
        p = fit_scaling(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]))
        assert p.constant.tolist() == [True, False]
        assert fit_scaling(np.array([[1.0, 2.0, 3.0]])).constant.all()

    def test_empty_matrix(self):
        with pytest.raises(EmptyMatrix):
            fit_scaling(np.zeros((0, 3)))

    def test_paper_orientation_values(self):
        m = np.array([[2.0], [4.0], [6.0]])
        assert apply_scaling(fit_scaling(m), m)[:, 0].tolist() == [1.0, 0.5, 0.0]

    def test_standard_orientation_values(self):
        m = np.array([[2.0], [4.0], [6.0]])
        assert apply_scaling(fit_scaling(m, "standard"), m)[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_maps_to_zero(self):
        m = np.array([[5.0], [5.0]])
        assert apply_scaling(fit_scaling(m), m).tolist() == [[0.0], [0.0]]

    def test_out_of_range_clamped(self):
        p = fit_scaling(np.array([[0.0], [10.0]]))
        out = apply_scaling(p, np.array([[-5.0], [20.0], [5.0]]))
        assert out[:, 0].tolist() == [1.0, 0.0, 0.5]

    def test_dimension_mismatch(self):
        p = fit_scaling(np.ones((3, 2)))
        with pytest.raises(DimensionMismatch):
            apply_scaling(p, np.ones((3, 3)))

    def test_unknown_orientation(self):
        with pytest.raises(InvalidConfig):
            fit_scaling(np.ones((2, 2)), "upside_down")

    @settings(max_examples=80, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_scaled_range_and_extremes(self, m):
        paper = apply_scaling(fit_scaling(m), m)
        std = apply_scaling(fit_scaling(m, "standard"), m)
        assert paper.min() >= 0.0 and paper.max() <= 1.0
        for j in range(m.shape[1]):
            col = m[:, j]
            if col.max() == col.min():
                assert np.all(paper[:, j] == 0.0)
                continue
            assert np.all(paper[col == col.min(), j] == 1.0)
            assert np.all(paper[col == col.max(), j] == 0.0)
            assert np.allclose(paper[:, j], 1.0 - std[:, j], rtol=0, atol=1e-15)
