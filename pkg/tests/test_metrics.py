import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regnas import (
    CorrectnessVector,
    RewardConfig,
    nfr,
    nfr_matrix,
    pair_nfr,
    pfr,
    relative_change,
    reward,
    top1,
)
from regnas.errors import ConfigError, DataMismatchError
from regnas.metrics import (
    load_predictions,
    negative_flip_count,
    positive_flip_count,
    read_correctness_csv,
    read_prediction_file,
    write_prediction_file,
)


def vec(*bits):
    return CorrectnessVector(np.array(bits, dtype=bool))


bitmaps = st.lists(st.booleans(), min_size=1, max_size=64)


class TestTop1:
    def test_all_correct(self):
        assert top1(vec(1, 1, 1)) == 1.0

    def test_hand_count(self):
        assert top1(vec(1, 1, 1, 0)) == 0.75

    def test_all_wrong(self):
        assert top1(vec(0, 0, 0)) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            CorrectnessVector(np.array([], dtype=bool))


class TestFlipRates:
    def test_self_comparison_is_zero(self):
        v = vec(1, 0, 1, 1)
        assert nfr(v, v) == 0.0
        assert pfr(v, v) == 0.0

    def test_hand_enumeration(self):
        ref, target = vec(1, 1, 1, 0), vec(1, 0, 1, 1)
        # only sample 1 flips negatively, only sample 3 positively
        assert nfr(ref, target) == 0.25
        assert pfr(ref, target) == 0.25
        assert top1(target) - top1(ref) == pfr(ref, target) - nfr(ref, target)

    def test_all_wrong_reference_cannot_flip(self):
        ref = vec(0, 0, 0, 0)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            target = CorrectnessVector(rng.integers(0, 2, 4).astype(bool))
            assert nfr(ref, target) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(DataMismatchError):
            nfr(vec(1, 0), vec(1, 0, 1))

    def test_asymmetry_witness(self):
        a, b = vec(1, 0), vec(0, 0)
        assert nfr(a, b) == 0.5
        assert nfr(b, a) == 0.0

    @given(bits_a=bitmaps, bits_b=bitmaps)
    def test_accounting_identity_exact(self, bits_a, bits_b):
        n = min(len(bits_a), len(bits_b))
        a = CorrectnessVector(np.array(bits_a[:n], dtype=bool))
        b = CorrectnessVector(np.array(bits_b[:n], dtype=bool))
        # integer-count identity, no float rounding involved
        assert b.num_correct - a.num_correct == positive_flip_count(a, b) - negative_flip_count(a, b)

    @given(bits_a=bitmaps, bits_b=bitmaps)
    def test_bounds(self, bits_a, bits_b):
        n = min(len(bits_a), len(bits_b))
        a = CorrectnessVector(np.array(bits_a[:n], dtype=bool))
        b = CorrectnessVector(np.array(bits_b[:n], dtype=bool))
        v = nfr(a, b)
        assert 0.0 <= v <= min(top1(a), 1.0 - top1(b)) + 1e-12


class TestReward:
    def test_presets(self):
        assert RewardConfig.preset("r0") == RewardConfig(1.0, 0.0)
        assert RewardConfig.preset("r1") == RewardConfig(0.0, 1.0)
        assert RewardConfig.preset("r2") == RewardConfig(1.0, 1.0)

    def test_table_values(self):
        # accuracy-only reward ignores the flip term entirely
        assert reward(0.7711, 0.0251, RewardConfig.preset("r0")) == pytest.approx(0.7711)
        assert reward(0.7711, 0.0251, RewardConfig.preset("r2")) == pytest.approx(0.7460)

    def test_nfr_only_preset_with_zero_flips(self):
        for t1 in (0.0, 0.4, 1.0):
            assert reward(t1, 0.0, RewardConfig.preset("r1")) == 0.0

    def test_monotonicity(self):
        r2 = RewardConfig.preset("r2")
        assert reward(0.8, 0.1, r2) > reward(0.7, 0.1, r2)
        assert reward(0.8, 0.1, r2) > reward(0.8, 0.2, r2)

    @given(
        scale=st.floats(min_value=0.01, max_value=100),
        points=st.lists(
            st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=2, max_size=8
        ),
    )
    def test_scaling_leaves_ordering_unchanged(self, scale, points):
        base = RewardConfig(1.0, 0.7)
        scaled = RewardConfig(scale * 1.0, scale * 0.7)
        def order(cfg):
            return sorted(range(len(points)), key=lambda i: reward(*points[i], cfg))
        assert order(base) == order(scaled)

    def test_invalid_weights(self):
        with pytest.raises(ConfigError):
            RewardConfig(0.0, 0.0)
        with pytest.raises(ConfigError):
            RewardConfig(-1.0, 1.0)

    def test_parse(self):
        assert RewardConfig.parse("R2") == RewardConfig(1.0, 1.0)
        assert RewardConfig.parse("1,0.5") == RewardConfig(1.0, 0.5)
        with pytest.raises(ConfigError):
            RewardConfig.parse("fast")


class TestNfrMatrix:
    def test_identical_models_zero(self):
        v = vec(1, 0, 1, 1)
        m = nfr_matrix([v, CorrectnessVector(v.bits.copy())])
        assert m.values[0][1] == 0.0

    def test_three_model_hand_enumeration(self):
        a = vec(1, 1, 0, 0)  # top1 .50
        b = vec(1, 0, 1, 0)  # top1 .50 (tie with a -> a is the baseline)
        c = vec(1, 1, 1, 0)  # top1 .75
        m = nfr_matrix([a, b, c], labels=("a", "b", "c"))
        # by hand: nfr(a,b)=1/4 (sample 1); nfr(a,c)=0; nfr(b,c)=0
        assert m.values[0][1] == pytest.approx(0.25)
        assert m.values[0][2] == pytest.approx(0.0)
        assert m.values[1][2] == pytest.approx(0.0)
        assert np.allclose(m.values, m.values.T)
        assert m.values[0][0] == 0.5 and m.values[2][2] == 0.75

    def test_lower_top1_is_baseline(self):
        low = vec(1, 0, 0, 0)
        high = vec(0, 1, 1, 0)
        # low top1 < high top1, so the pair value counts low-right-high-wrong
        assert pair_nfr(low, high) == nfr(low, high) == 0.25
        assert pair_nfr(high, low) == nfr(low, high)

    def test_needs_two_models(self):
        with pytest.raises(DataMismatchError):
            nfr_matrix([vec(1, 0)])

    def test_length_mismatch(self):
        with pytest.raises(DataMismatchError):
            nfr_matrix([vec(1, 0), vec(1, 0, 1)])


class TestRelativeChange:
    def test_flip_rate_reduction(self):
        assert relative_change(2.16, 3.25) == pytest.approx(-0.33538, abs=1e-4)
        assert round(100 * relative_change(2.16, 3.25), 1) == -33.5

    def test_equal_values(self):
        assert relative_change(5.0, 5.0) == 0.0

    def test_accuracy_change(self):
        assert relative_change(78.80, 79.21) == pytest.approx(-0.0051, abs=1e-4)

    def test_zero_baseline(self):
        with pytest.raises(ZeroDivisionError):
            relative_change(1.0, 0.0)


class TestPredictionFiles:
    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        entries = [
            (f"model{i}", CorrectnessVector(rng.integers(0, 2, 37).astype(bool)))
            for i in range(3)
        ]
        path = tmp_path / "preds.bin"
        write_prediction_file(path, 37, entries)
        n, loaded = read_prediction_file(path)
        assert n == 37
        for (k1, v1), (k2, v2) in zip(entries, loaded):
            assert k1 == k2 and v1.same_as(v2)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
        with pytest.raises(ConfigError, match="magic"):
            read_prediction_file(path)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# key=special\nsample_id,correct\n0,1\n1,0\n2,1\n")
        key, v = read_correctness_csv(path)
        assert key == "special"
        assert list(v.bits) == [True, False, True]

    def test_csv_key_defaults_to_stem(self, tmp_path):
        path = tmp_path / "resnetish.csv"
        path.write_text("sample_id,correct\n0,1\n1,1\n")
        key, _ = read_correctness_csv(path)
        assert key == "resnetish"

    def test_csv_requires_dense_ids(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample_id,correct\n0,1\n2,1\n")
        with pytest.raises(ConfigError):
            read_correctness_csv(path)

    def test_sniffing_loader(self, tmp_path):
        bin_path = tmp_path / "a.bin"
        write_prediction_file(bin_path, 4, [("x", vec(1, 0, 1, 1))])
        csv_path = tmp_path / "b.csv"
        csv_path.write_text("sample_id,correct\n0,1\n1,0\n2,1\n3,1\n")
        n1, e1 = load_predictions(bin_path)
        n2, e2 = load_predictions(csv_path)
        assert n1 == n2 == 4
        assert e1[0][1].same_as(e2[0][1])
