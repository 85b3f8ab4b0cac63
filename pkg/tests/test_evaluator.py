import math

import numpy as np
import pytest

from regnas import (
    Architecture,
    PredictionTable,
    SearchSpaceDef,
    StageDef,
    SyntheticSupernetModel,
    contains,
    digest,
    enumerate_architectures,
    nfr,
    pair_nfr,
    random_sample,
    shared_weight_count,
    table_evaluate,
    top1,
    weight_count,
)
from regnas.errors import DataMismatchError, EvaluatorMissError
from regnas.hashing import derive, derive_array, mix64, u01_array


def depth_ladder_space():
    # two equal layers: the shallow variant owns exactly half the weights
    return SearchSpaceDef(
        stages=(StageDef((1, 2), (3,), (8,)),), input_resolution=16, stem_channels=8
    )


class TestMargin:
    def test_noise_off_margin_formula(self):
        space = depth_ladder_space()
        model = SyntheticSupernetModel(space=space, seed=7, n_samples=500, noise_scale=0.0)
        shallow = Architecture((1,), ((3,),), ((8,),))
        assert model.capacity(shallow) == 0.5
        d = model.difficulties()
        got = model.margins(shallow)
        assert np.array_equal(got, 1.0 * 0.5 - d)

    def test_half_capacity_threshold_rule(self):
        space = depth_ladder_space()
        model = SyntheticSupernetModel(space=space, seed=3, n_samples=2000, noise_scale=0.0)
        shallow = Architecture((1,), ((3,),), ((8,),))
        bits = model.evaluate(shallow).bits
        assert np.array_equal(bits, model.difficulties() < 0.5)

    def test_bitwise_determinism(self, oracle_space):
        a = random_sample(oracle_space, 11)
        m1 = SyntheticSupernetModel(space=oracle_space, seed=42, n_samples=1000)
        m2 = SyntheticSupernetModel(space=oracle_space, seed=42, n_samples=1000)
        assert np.array_equal(m1.margins(a), m2.margins(a))
        assert m1.margin(a, 17) == m2.margin(a, 17)

    def test_margin_index_out_of_range(self, oracle_space):
        model = SyntheticSupernetModel(space=oracle_space, seed=0, n_samples=10)
        with pytest.raises(IndexError):
            model.margin(random_sample(oracle_space, 0), 10)

    def test_margins_match_documented_construction(self, oracle_space):
        """Rebuild margins from scratch out of the documented hash streams."""
        model = SyntheticSupernetModel(
            space=oracle_space, seed=99, n_samples=257, noise_scale=0.4, capacity_gain=1.3
        )
        a = random_sample(oracle_space, 5)
        base = mix64(99)
        d = u01_array(derive_array(derive(base, "difficulty"), 257))
        acc = np.zeros(257, dtype=np.int64)
        for (s, j, ring, ib, ob) in model.unit_ids(a):
            key = derive(base, "unit-noise", s, j, ring, ib, ob)
            acc += (derive_array(key, 257) >> np.uint64(32)).astype(np.int64) - 2**31
        units = len(model.unit_ids(a))
        expected = (
            1.3 * model.capacity(a)
            - d
            + 0.4 * (acc.astype(np.float64) * (math.sqrt(3.0) * 2.0**-31) / math.sqrt(units))
        )
        assert np.array_equal(model.margins(a), expected)


class TestUnitSets:
    def test_unit_count_matches_enumeration(self, oracle_space):
        model = SyntheticSupernetModel(space=oracle_space, seed=0, n_samples=10)
        for seed in range(20):
            a = random_sample(oracle_space, seed)
            assert model.unit_count(a) == len(model.unit_ids(a))

    def test_containment_gives_unit_subset(self, oracle_space):
        from regnas import constrained_sample

        model = SyntheticSupernetModel(space=oracle_space, seed=0, n_samples=10)
        for seed in range(50):
            ref = random_sample(oracle_space, seed)
            big = constrained_sample(oracle_space, ref, seed + 1)
            assert set(model.unit_ids(ref)) <= set(model.unit_ids(big))

    def test_identical_unit_sets_identical_bitmaps(self):
        # widths 12 and 16 occupy the same two 8-channel blocks
        space = SearchSpaceDef(
            stages=(StageDef((1,), (3,), (12, 16)),), input_resolution=16, stem_channels=8
        )
        model = SyntheticSupernetModel(space=space, seed=5, n_samples=1000)
        narrow = Architecture((1,), ((3,),), ((12,),))
        wide = Architecture((1,), ((3,),), ((16,),))
        assert model.unit_ids(narrow) == model.unit_ids(wide)
        assert np.array_equal(model.evaluate(narrow).bits, model.evaluate(wide).bits)
        assert nfr(model.evaluate(narrow), model.evaluate(wide)) == 0.0

    def test_quantized_volume_equals_weight_count_when_aligned(self, oracle_space):
        model = SyntheticSupernetModel(space=oracle_space, seed=0, n_samples=10)
        for seed in range(20):
            a = random_sample(oracle_space, seed)
            assert model.quantized_volume(a) == weight_count(oracle_space, a)


class TestEvaluate:
    def test_large_gain_maximal_architecture_all_correct(self, oracle_space):
        model = SyntheticSupernetModel(
            space=oracle_space, seed=1, n_samples=500, capacity_gain=2.0, noise_scale=0.0
        )
        bits = model.evaluate(oracle_space.max_architecture())
        assert top1(bits) == 1.0

    def test_noise_off_depends_only_on_capacity(self):
        # same quantized volume through different unit sets -> identical bitmaps
        space = SearchSpaceDef(
            stages=(StageDef((2,), (3, 5), (8,)),), input_resolution=16, stem_channels=8
        )
        model = SyntheticSupernetModel(space=space, seed=2, n_samples=1000, noise_scale=0.0)
        a = Architecture((2,), ((3, 5),), ((8, 8),))
        b = Architecture((2,), ((5, 3),), ((8, 8),))
        assert model.unit_ids(a) != model.unit_ids(b)
        assert model.quantized_volume(a) == model.quantized_volume(b)
        assert np.array_equal(model.evaluate(a).bits, model.evaluate(b).bits)

    def test_capacity_monotone_at_zero_noise(self, oracle_space):
        from regnas import constrained_sample

        model = SyntheticSupernetModel(
            space=oracle_space, seed=4, n_samples=500, noise_scale=0.0
        )
        for seed in range(30):
            ref = random_sample(oracle_space, seed)
            big = constrained_sample(oracle_space, ref, seed + 1)
            # per-sample monotone: anything the small model solves, the big one does
            assert nfr(model.evaluate(ref), model.evaluate(big)) == 0.0
            assert top1(model.evaluate(ref)) <= top1(model.evaluate(big))

    def test_evaluate_many_matches_loop(self, oracle_space):
        model = SyntheticSupernetModel(space=oracle_space, seed=6, n_samples=300)
        archs = [random_sample(oracle_space, s) for s in range(10)]
        batch = model.evaluate_many(archs)
        for a, bits in zip(archs, batch):
            assert np.array_equal(bits.bits, model.evaluate(a).bits)

    def test_sharing_anticorrelates_with_flips(self, oracle_space):
        """More shared weight between two architectures -> fewer negative flips."""
        from scipy import stats

        model = SyntheticSupernetModel(
            space=oracle_space, seed=2024, n_samples=4000, capacity_gain=1.0, noise_scale=0.3
        )
        fractions, flips = [], []
        for seed in range(200):
            a = random_sample(oracle_space, 2 * seed)
            b = random_sample(oracle_space, 2 * seed + 1)
            if a == b:
                continue
            shared = shared_weight_count(oracle_space, a, b)
            wa, wb = weight_count(oracle_space, a), weight_count(oracle_space, b)
            fractions.append(shared / math.sqrt(wa * wb))
            flips.append(pair_nfr(model.evaluate(a), model.evaluate(b)))
        rho, pvalue = stats.spearmanr(fractions, flips)
        assert rho < 0
        assert pvalue < 0.01


class TestPredictionTable:
    def test_round_trip(self, point_space):
        model = SyntheticSupernetModel(space=point_space, seed=0, n_samples=64)
        a = point_space.max_architecture()
        table = PredictionTable(n_samples=64)
        table.add(digest(a), model.evaluate(a))
        assert table_evaluate(table, a).same_as(model.evaluate(a))

    def test_missing_digest_named_in_error(self, oracle_space):
        table = PredictionTable(n_samples=4)
        a = random_sample(oracle_space, 0)
        with pytest.raises(EvaluatorMissError, match=digest(a)):
            table_evaluate(table, a)

    def test_duplicate_digest_rejected(self):
        import numpy as np

        v = np.ones(4, dtype=bool)
        from regnas import CorrectnessVector

        table = PredictionTable(n_samples=4)
        table.add("abc", CorrectnessVector(v))
        with pytest.raises(DataMismatchError):
            table.add("abc", CorrectnessVector(v))

    def test_wrong_length_rejected(self):
        import numpy as np

        from regnas import CorrectnessVector

        table = PredictionTable(n_samples=8)
        with pytest.raises(DataMismatchError):
            table.add("abc", CorrectnessVector(np.ones(4, dtype=bool)))

    def test_full_enumeration_table(self):
        # 16-architecture space: a table holding every digest supports search
        space = SearchSpaceDef(
            stages=(StageDef((1,), (3, 5), (8, 16)), StageDef((1,), (3, 5), (8, 16))),
            input_resolution=16,
            stem_channels=8,
        )
        model = SyntheticSupernetModel(space=space, seed=9, n_samples=128)
        table = PredictionTable(n_samples=128)
        count = 0
        for a in enumerate_architectures(space):
            table.add(digest(a), model.evaluate(a))
            count += 1
        assert count == 16
        for a in enumerate_architectures(space):
            assert table_evaluate(table, a).same_as(model.evaluate(a))
