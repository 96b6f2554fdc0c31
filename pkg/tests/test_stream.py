import math
from collections import Counter

import numpy as np
import pytest

from streamvec.stream import StreamModel, TrainerConfig, effective_radius


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def small_config(**kwargs):
    base = dict(
        vocab_capacity=50,
        reservoir_capacity=200,
        negatives=2,
        dim=8,
        context_radius=2,
        subsample_threshold=1e-3,
        dynamic_windows=False,
        horizon=1000.0,
        rng_seed=7,
    )
    base.update(kwargs)
    return TrainerConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainerConfig(vocab_capacity=0).validate()
        with pytest.raises(ValueError):
            TrainerConfig(subsample_threshold=0.0).validate()
        with pytest.raises(ValueError):
            TrainerConfig(rho0=1e-6, rho_min=1e-2).validate()
        with pytest.raises(ValueError):
            TrainerConfig(schedule="exp").validate()
        TrainerConfig(negatives=0).validate()  # S=0 is a degenerate but legal setup

    def test_recipe_defaults(self):
        cfg = TrainerConfig()
        assert cfg.subsample_threshold == 1e-3
        assert cfg.negatives == 5
        assert cfg.context_radius == 2
        assert cfg.dynamic_windows is True
        assert cfg.rho0 == 2.5e-2 and cfg.rho_min == 2.5e-6
        assert cfg.vocab_capacity == 100_000
        assert cfg.reservoir_capacity == 100_000_000
        assert cfg.dim == 100


class TestEffectiveRadius:
    def test_c1_always_one(self):
        cfg = small_config(context_radius=1, dynamic_windows=True)
        g = rng()
        assert all(effective_radius(cfg, g) == 1 for _ in range(100))

    def test_disabled_returns_c(self):
        cfg = small_config(context_radius=5, dynamic_windows=False)
        g = rng()
        assert all(effective_radius(cfg, g) == 5 for _ in range(100))

    def test_uniform_over_1_to_c(self):
        cfg = small_config(context_radius=4, dynamic_windows=True)
        g = rng(3)
        trials = 40_000
        counts = Counter(effective_radius(cfg, g) for _ in range(trials))
        assert set(counts) == {1, 2, 3, 4}
        p = 0.25
        sigma = (trials * p * (1 - p)) ** 0.5
        for r in (1, 2, 3, 4):
            assert abs(counts[r] - trials * p) < 3 * sigma


class TestSubsample:
    def test_unseen_words_always_kept(self):
        model = StreamModel(small_config())
        sent = ["never", "seen", "before"]
        assert model.subsample(sent, rng()) == sent

    def test_rare_resident_words_kept(self):
        # f <= threshold implies keep probability 1
        model = StreamModel(small_config(subsample_threshold=0.5))
        for w in ["a", "b", "a", "b", "c", "d"]:
            model.sketch.observe(w)
        for seed in range(20):
            kept = model.subsample(["a", "b", "c", "d"], rng(seed))
            assert kept == ["a", "b", "c", "d"]

    def test_retention_probability_quarter_threshold(self):
        # f = 4*threshold gives keep probability sqrt(1/4) = 0.5
        model = StreamModel(small_config(subsample_threshold=0.25))
        for _ in range(100):
            model.sketch.observe("x")  # f = 1.0 = 4 * 0.25
        g = rng(11)
        trials = 40_000
        kept = sum(len(model.subsample(["x"], g)) for _ in range(trials))
        sigma = (trials * 0.25) ** 0.5
        assert abs(kept - trials * 0.5) < 3 * sigma

    def test_order_preserved(self):
        model = StreamModel(small_config())
        sent = [f"w{i}" for i in range(30)]
        assert model.subsample(sent, rng()) == sent

    def test_empty(self):
        model = StreamModel(small_config())
        assert model.subsample([], rng()) == []


class TestTrainSentence:
    def test_empty_sentence_only_counts(self):
        model = StreamModel(small_config())
        before = model.table.target.copy()
        model.train_sentence([])
        assert model.stats.sentences == 1
        assert model.stats.tokens == 0
        assert model.sketch.observed == 0 and len(model.negatives) == 0
        assert (model.table.target == before).all()

    def test_single_token_no_gradients(self):
        model = StreamModel(small_config(context_radius=2))
        steps_before = model.learning.steps.copy()
        table_before = model.table.target.copy()
        model.train_sentence(["solo"])
        assert model.sketch.count("solo") == 1
        assert len(model.negatives) == 1
        assert model.stats.contexts_trained == 0
        assert (model.learning.steps == steps_before).all()
        assert (model.table.target == table_before).all()

    def test_three_token_window_two_pairs(self):
        # C=1, all resident, S=0: one window, pairs center->left and center->right
        model = StreamModel(small_config(context_radius=1, negatives=0))
        steps_before = model.learning.steps.copy()
        model.train_sentence(["a", "b", "c"])
        assert model.stats.contexts_trained == 1
        assert model.stats.contexts_skipped == 0
        steps = model.learning.steps
        sa, sb, sc = (model.sketch.slot_of(w) for w in "abc")
        assert steps[sb] - steps_before[sb] == 2  # input of both pairs
        assert steps[sa] - steps_before[sa] == 1
        assert steps[sc] - steps_before[sc] == 1

    def test_window_with_ejected_word_skipped(self):
        # K=2: inserting c evicts a, so the window (a, b, c) is OOV-skipped
        model = StreamModel(small_config(vocab_capacity=2, context_radius=1, negatives=0))
        steps_before = model.learning.steps.copy()
        model.train_sentence(["a", "b", "c"])
        assert model.sketch.slot_of("a") is None
        assert model.stats.ejections == 1
        assert model.stats.contexts_trained == 0
        assert model.stats.contexts_skipped == 1
        assert (model.learning.steps == steps_before).all()

    def test_ejection_resets_slot(self):
        model = StreamModel(small_config(vocab_capacity=2, context_radius=1, negatives=0))
        model.train_sentence(["a", "b"])
        slot_a = model.sketch.slot_of("a")
        model.learning.steps[slot_a] = 99
        row_before = model.table.target[slot_a].copy()
        model.train_sentence(["b", "c"])  # c replaces a
        assert model.sketch.slot_of("c") == slot_a
        assert model.learning.steps[slot_a] == 1
        assert not (model.table.target[slot_a] == row_before).all()

    def test_retained_tokens_enter_sketch_and_reservoir(self):
        cfg = small_config(subsample_threshold=1e-4)
        model = StreamModel(cfg)
        # make "the" very frequent so subsampling actually drops it
        for _ in range(2000):
            model.sketch.observe("the")
        for w in ("x", "y"):
            model.sketch.observe(w)
        sentence = ["the", "x", "the", "y", "the", "z"] * 5
        probe = StreamModel(cfg)
        probe.sketch = model.sketch
        state = model.rng.bit_generator.state
        replay = np.random.Generator(np.random.PCG64())
        replay.bit_generator.state = state
        expected_kept = model.subsample(sentence, replay)
        sketch_before = Counter(dict(model.sketch.items()))
        model.train_sentence(sentence)
        sketch_after = Counter(dict(model.sketch.items()))
        grown = sketch_after - sketch_before
        assert grown == Counter(expected_kept)
        assert model.stats.retained_tokens == len(expected_kept)
        assert len(model.negatives) == len(expected_kept)


class TestTrainStream:
    def corpus(self, n_sentences=200, vocab=30, seed=5, length=8):
        g = rng(seed)
        return [[f"w{int(x)}" for x in g.integers(0, vocab, length)] for _ in range(n_sentences)]

    def test_empty_iterator(self):
        model = StreamModel(small_config())
        stats = model.train_stream([])
        assert stats.sentences == 0 and stats.tokens == 0

    def test_no_ejections_when_capacity_covers_vocab(self):
        model = StreamModel(small_config(vocab_capacity=64))
        stats = model.train_stream(self.corpus(vocab=30))
        assert stats.ejections == 0

    def test_determinism_bitwise(self):
        sents = self.corpus()
        m1 = StreamModel(small_config(dynamic_windows=True))
        m2 = StreamModel(small_config(dynamic_windows=True))
        m1.train_stream(sents)
        m2.train_stream(sents)
        assert (m1.table.target == m2.table.target).all()
        assert (m1.table.context == m2.table.context).all()
        assert (m1.learning.steps == m2.learning.steps).all()
        assert m1.stats == m2.stats

    def test_resumable(self):
        sents = self.corpus()
        whole = StreamModel(small_config())
        whole.train_stream(sents)
        split = StreamModel(small_config())
        split.train_stream(sents[:100])
        split.train_stream(sents[100:])
        assert (whole.table.target == split.table.target).all()
        assert whole.stats == split.stats

    def test_stats_accounting(self):
        model = StreamModel(small_config(vocab_capacity=10))
        stats = model.train_stream(self.corpus(vocab=40))
        assert stats.tokens >= stats.retained_tokens
        assert stats.contexts_trained + stats.contexts_skipped > 0
        assert stats.sentences == 200

    def test_bounded_memory(self):
        cfg = small_config(vocab_capacity=8, reservoir_capacity=32)
        model = StreamModel(cfg)
        model.train_stream(self.corpus(vocab=200, n_sentences=300))
        assert model.sketch.size() == 8
        assert len(model.sketch._core.slot_of) == 8
        assert len(model.negatives) == 32
        assert model.table.target.shape == (8, cfg.dim)
        assert len(model.learning.steps) == 8

    def test_windows_examined_count(self):
        # with C=2 a sentence of J tokens kept whole examines J-4 windows
        model = StreamModel(small_config(subsample_threshold=10.0, context_radius=2))
        model.train_stream(self.corpus(n_sentences=50, length=9))
        stats = model.stats
        assert stats.retained_tokens == stats.tokens  # threshold 10 keeps everything
        assert stats.contexts_trained + stats.contexts_skipped == 50 * (9 - 4)
