import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bels import BelsConfig, BelsModel, InvalidConfig, ShapeMismatch, preset, run_variant, vote
from bels.streams import ArrayStream, sea_stream


def small(**kw):
    base = dict(n=4, m=2, chunk_size=5, m_o=5, m_p=4, seed=0)
    base.update(kw)
    return BelsConfig(**base)


def chunks_of(stream, size):
    return [(c.x, c.y) for c in stream.chunks(size)]


class TestVote:
    def test_two_against_one(self):
        s = [np.array([[0.9, 0.1]]), np.array([[0.9, 0.1]]), np.array([[0.2, 0.8]])]
        assert vote(s, 2).tolist() == [0]

    def test_single_member_is_its_argmax(self):
        s = np.random.default_rng(0).standard_normal((7, 4))
        assert vote([s], 4).tolist() == np.argmax(s, axis=1).tolist()

    def test_tie_goes_to_lowest_class(self):
        assert vote([np.array([[0.1, 0.9]]), np.array([[0.9, 0.1]])], 2).tolist() == [0]
        three = [np.array([[0, 0, 1.0]]), np.array([[0, 1.0, 0]])]
        assert vote(three, 3).tolist() == [1]

    def test_majority_of_three(self):
        votes = [np.eye(2)[[0]], np.eye(2)[[0]], np.eye(2)[[1]]]
        assert vote(votes, 2).tolist() == [0]

    def test_errors(self):
        with pytest.raises(ShapeMismatch):
            vote([], 2)
        with pytest.raises(ShapeMismatch):
            vote([np.zeros((2, 3))], 2)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 9), st.integers(2, 5), st.integers(0, 10_000))
    def test_matches_counting_oracle(self, members, c, seed):
        rng = np.random.default_rng(seed)
        scores = rng.standard_normal((members, 6, c))
        got = vote(list(scores), c)
        for row in range(6):
            counts = [0] * c
            for m in range(members):
                counts[int(np.argmax(scores[m, row]))] += 1
            assert got[row] == counts.index(max(counts))


class TestConfig:
    def test_defaults(self):
        cfg = BelsConfig()
        assert (cfg.m_o, cfg.m_p, cfg.eta, cfg.kappa, cfg.lambda_ridge) == (75, 300, 0.5, 1e-3, 1e-8)

    def test_presets(self):
        assert (preset("BELS2").n, preset("BELS2").m) == (25, 50)
        assert preset("BELS3", chunk_size=2).chunk_size == 2
        with pytest.raises(InvalidConfig):
            preset("BELS9")

    @pytest.mark.parametrize(
        "bad", [dict(variant="RF"), dict(chunk_size=0), dict(m_o=0), dict(eta=1.5), dict(delta_init=-0.1)]
    )
    def test_invalid(self, bad):
        with pytest.raises(InvalidConfig):
            BelsConfig(**bad)


class TestColdStart:
    def test_first_chunk_predicts_zero_then_trains(self):
        model = BelsModel(small(), 3, 2)
        x = np.random.default_rng(0).uniform(size=(5, 3))
        pred = model.predict(x)
        assert pred.tolist() == [0] * 5
        assert len(model.ensemble.active) == 1 and not model.ensemble.active[0].trained
        res = model.learn(x, np.array([1, 1, 0, 1, 0]))
        assert res.per_instance_accuracy == []
        assert model.ensemble.active[0].trained

    def test_untrained_newcomer_does_not_vote(self):
        model = BelsModel(small(), 3, 2)
        rng = np.random.default_rng(1)
        for _ in range(2):
            model.process_chunk(rng.uniform(size=(5, 3)), rng.integers(0, 2, 5))
        model.predict(rng.uniform(size=(5, 3)))
        tested = model._pending["tested"]
        assert len(model.ensemble.active) == 3 and len(tested) == 2

    def test_protocol_misuse(self):
        model = BelsModel(small(), 3, 2)
        with pytest.raises(RuntimeError):
            model.learn(np.zeros((5, 3)), np.zeros(5, int))
        model.predict(np.zeros((5, 3)))
        with pytest.raises(RuntimeError):
            model.predict(np.zeros((5, 3)))

    def test_shape_errors(self):
        model = BelsModel(small(), 3, 2)
        with pytest.raises(ShapeMismatch):
            model.predict(np.zeros((5, 4)))
        model.predict(np.zeros((5, 3)))
        with pytest.raises(ShapeMismatch):
            model.learn(np.zeros((5, 3)), np.ones((5, 2)))


def drive(model, stream, size, hook=None):
    for x, y in chunks_of(stream, size):
        model.process_chunk(x, y)
        if hook:
            hook(model)


class TestInvariants:
    @pytest.mark.parametrize("chunk", [2, 5])
    def test_capacity_and_conservation(self, chunk):
        cfg = small(chunk_size=chunk, m_o=4, m_p=3)
        stream = sea_stream([0, 2, 3, 1], 300, noise=0.2, seed=2, standardize=True)
        model = BelsModel(cfg, 3, 2)
        seen_ids: set[int] = set()
        discarded: set[int] = set()

        def check(m):
            ens = m.ensemble
            assert len(ens.active) <= cfg.m_o and len(ens.pool) <= cfg.m_p
            act = {l.id for l in ens.active}
            pool = {l.id for l in ens.pool}
            assert len(act) == len(ens.active) and len(pool) == len(ens.pool)
            assert not act & pool
            # a discarded instance never comes back
            assert not (act | pool) & discarded
            discarded.update(seen_ids - act - pool)
            seen_ids.update(act | pool)

        drive(model, stream, chunk, check)
        assert model.instances_created == len(seen_ids)
        assert model.instances_created > cfg.m_o  # drift forced replacements

    def test_delta_tracks_overall_accuracy(self):
        cfg = small(chunk_size=5)
        stream = sea_stream([0, 2], 200, noise=0.1, seed=3, standardize=True)
        model = BelsModel(cfg, 3, 2)
        correct = seen = 0
        for x, y in chunks_of(stream, 5):
            pred = model.predict(x)
            model.learn(x, y)
            correct += int(np.sum(pred == np.argmax(y, axis=1)))
            seen += len(pred)
            assert model.ensemble.delta == pytest.approx(correct / seen, abs=1e-15)
            assert 0.0 <= model.ensemble.delta <= 1.0

    def test_delta_fixed_for_chunk_size_two(self):
        cfg = small(chunk_size=2, delta_init=0.5)
        stream = sea_stream([0, 2], 100, noise=0.1, seed=3, standardize=True)
        model = BelsModel(cfg, 3, 2)
        drive(model, stream, 2, lambda m: (m.ensemble.delta == 0.5) or pytest.fail("delta moved"))

    def test_determinism(self):
        stream = sea_stream([0, 1], 400, noise=0.1, seed=4, standardize=True)
        a = run_variant(small(), stream, window=100)
        b = run_variant(small(), stream, window=100)
        assert a.column("cumulative_accuracy").tobytes() == b.column("cumulative_accuracy").tobytes()
        assert a.column("window_accuracy").tobytes() == b.column("window_accuracy").tobytes()

    def test_fixed_concept_fills_ensemble_and_settles(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, size=(300, 2))
        y = (x @ [1.0, -0.5] > 0.1).astype(int)
        model = BelsModel(small(chunk_size=10, m_o=5, m_p=10), 2, 2)
        trace = []
        for k in range(30):
            model.process_chunk(x[10 * k : 10 * k + 10], y[10 * k : 10 * k + 10])
            trace.append((model.instances_created, len(model.ensemble.active), len(model.ensemble.pool)))
        assert trace[-1][1] == 5
        # replacements become rare once the concept is learnt
        assert trace[-1][0] - trace[19][0] <= 2
        assert len({t[2] for t in trace[-5:]}) == 1

    def test_readmitted_member_leaves_pool(self):
        cfg = small(chunk_size=5, m_o=3, m_p=5)
        stream = sea_stream([0, 3, 0, 3], 150, noise=0.0, seed=5, standardize=True)
        model = BelsModel(cfg, 3, 2)
        readmissions = 0
        for x, y in chunks_of(stream, 5):
            pool_before = {l.id for l in model.ensemble.pool}
            cands = set(model.ensemble.candidates)
            model.predict(x)
            back = {l.id for l in model.ensemble.active} & pool_before
            assert back <= cands
            assert not back & {l.id for l in model.ensemble.pool}
            readmissions += len(back)
            model.learn(x, y)
        assert readmissions > 0


class TestVariants:
    def stream(self):
        return sea_stream([0, 2], 300, noise=0.1, seed=6, standardize=True)

    def test_bels_ens_never_pools(self):
        model = BelsModel(small(variant="BELS-Ens", m_o=3), 3, 2)
        drive(model, self.stream(), 5, lambda m: (m.ensemble.pool == []) or pytest.fail("pooled"))
        assert model.instances_created > 3

    @pytest.mark.parametrize("variant", ["BLS", "BELS-FPs"])
    def test_single_layer_variants_create_one_instance(self, variant):
        model = BelsModel(small(variant=variant), 3, 2)
        drive(model, self.stream(), 5)
        assert model.instances_created == 1
        assert len(model.ensemble.active) == 1 and model.ensemble.pool == []

    def test_bls_freezes_map_and_fps_refreshes_it(self):
        frozen = BelsModel(small(variant="BLS"), 3, 2)
        live = BelsModel(small(variant="BELS-FPs"), 3, 2)
        data = chunks_of(self.stream(), 5)
        for model in (frozen, live):
            model.process_chunk(*data[0])
        mu_frozen, mu_live = frozen.feature_space.mu.copy(), live.feature_space.mu.copy()
        np.testing.assert_array_equal(mu_frozen, mu_live)
        for model in (frozen, live):
            for x, y in data[1:10]:
                model.process_chunk(x, y)
        np.testing.assert_array_equal(frozen.feature_space.mu, mu_frozen)
        assert not np.array_equal(live.feature_space.mu, mu_live)

    def test_unknown_variant(self):
        with pytest.raises(InvalidConfig):
            small(variant="BELS-XL")


@pytest.mark.parametrize("variant, floor", [("BELS-FPs", 0.95), ("BELS", 0.85)])
def test_learns_a_linear_concept(variant, floor):
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=(3000, 4))
    y = (x[:, 0] + x[:, 1] - x[:, 2] > 0).astype(int)
    config = small(n=10, m=10, chunk_size=10, variant=variant)
    series = run_variant(config, ArrayStream(x, y, 2), window=500)
    assert series.records[-1].window_accuracy > floor


def test_class_index_and_one_hot_labels_agree():
    stream = sea_stream([0], 100, noise=0.1, seed=7, standardize=True)
    a, b = BelsModel(small(), 3, 2), BelsModel(small(), 3, 2)
    for c in stream.chunks(5):
        pa = a.predict(c.x)
        pb = b.predict(c.x)
        np.testing.assert_array_equal(pa, pb)
        a.learn(c.x, c.y)
        b.learn(c.x, c.labels)
