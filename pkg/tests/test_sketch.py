import io
from collections import Counter

import numpy as np
import pytest

from streamvec.sketch import FILLED, HIT, REPLACED, SpaceSavingSketch


class NaiveSpaceSaving:
    """O(K)-per-update reference: three-case rule, evicting the
    minimum-count entry that was least recently updated."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = {}  # word -> [count, last_update_seq]
        self.seq = 0

    def observe(self, word):
        self.seq += 1
        if word in self.entries:
            self.entries[word][0] += 1
            self.entries[word][1] = self.seq
            return None
        if len(self.entries) < self.capacity:
            self.entries[word] = [1, self.seq]
            return None
        victim = min(self.entries.items(), key=lambda kv: (kv[1][0], kv[1][1]))[0]
        count = self.entries[victim][0]
        del self.entries[victim]
        self.entries[word] = [count + 1, self.seq]
        return victim

    def counts(self):
        return {w: v[0] for w, v in self.entries.items()}


def feed(sketch, words):
    return [sketch.observe(w) for w in words]


class TestConstruction:
    def test_new(self):
        s = SpaceSavingSketch(3)
        assert s.capacity == 3 and s.size() == 0 and s.observed == 0

    def test_single_slot(self):
        s = SpaceSavingSketch(1)
        s.observe("x")
        assert s.count("x") == 1

    def test_zero_capacity_rejected(self):
        with pytest.raises(ValueError):
            SpaceSavingSketch(0)

    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            SpaceSavingSketch(2).observe("")


class TestThreeCases:
    def test_first_observation_fills(self):
        s = SpaceSavingSketch(2)
        out = s.observe("a")
        assert out.kind == FILLED and s.count("a") == 1

    def test_hit_increments(self):
        s = SpaceSavingSketch(2)
        s.observe("a")
        out = s.observe("a")
        assert out.kind == HIT and out.ejected is None and s.count("a") == 2

    def test_replacement_hand_example(self):
        # K=2, stream a,b,a,c: c replaces b and inherits its count + 1
        s = SpaceSavingSketch(2)
        outs = feed(s, ["a", "b", "a", "c"])
        assert outs[-1].kind == REPLACED and outs[-1].ejected == "b"
        assert dict(s.items()) == {"a": 2, "c": 2}
        assert s.slot_of("b") is None
        assert s.slot_of("a") is not None
        assert s.count("c") == 2  # over-estimate of true count 1, within n/K = 2

    def test_observed_always_increments(self):
        s = SpaceSavingSketch(2)
        feed(s, ["a", "b", "c", "a", "d"])
        assert s.observed == 5


class TestQueries:
    def test_unseen_word(self):
        s = SpaceSavingSketch(2)
        s.observe("a")
        assert s.count("zzz") is None and s.slot_of("zzz") is None

    def test_min_count(self):
        s = SpaceSavingSketch(4)
        feed(s, ["a"] * 5 + ["b"] * 2)
        assert s.min_count() == 2
        assert SpaceSavingSketch(4).min_count() == 0

    def test_min_count_full_uniform(self):
        s = SpaceSavingSketch(3)
        feed(s, ["a", "b", "c"])
        assert s.min_count() == 1

    def test_items_sorted_with_tiebreak(self):
        s = SpaceSavingSketch(4)
        feed(s, ["c", "a", "b", "b"])
        assert s.items() == [("b", 2), ("a", 1), ("c", 1)]
        assert SpaceSavingSketch(2).items() == []
        single = SpaceSavingSketch(2)
        feed(single, ["x"] * 7)
        assert single.items() == [("x", 7)]


class TestGuarantees:
    def test_exact_when_capacity_covers_vocab(self):
        rng = np.random.default_rng(1)
        words = [f"w{x}" for x in rng.integers(0, 20, 500)]
        s = SpaceSavingSketch(50)
        feed(s, words)
        truth = Counter(words)
        assert dict(s.items()) == dict(truth)

    @pytest.mark.parametrize("seed", range(5))
    def test_bounds_and_containment_random_streams(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 15))
        words = [f"w{min(int(x), 60)}" for x in rng.zipf(1.2, 2000)]
        s = SpaceSavingSketch(k)
        truth = Counter()
        for i, w in enumerate(words, 1):
            truth[w] += 1
            s.observe(w)
            if i % 250 == 0 or i == len(words):
                stored = dict(s.items())
                assert sum(stored.values()) == i
                for word, c in stored.items():
                    assert 0 <= c - truth[word] <= i / k
                for word, c in truth.items():
                    if c > i / k:
                        assert word in stored

    def test_matches_naive_reference(self):
        rng = np.random.default_rng(7)
        words = [f"w{int(x)}" for x in rng.integers(0, 30, 3000)]
        s = SpaceSavingSketch(9)
        ref = NaiveSpaceSaving(9)
        for w in words:
            out = s.observe(w)
            assert out.ejected == ref.observe(w)
        assert dict(s.items()) == ref.counts()

    def test_single_increment_per_observe(self):
        # slot counts never decrease; exactly one rises by exactly 1
        rng = np.random.default_rng(3)
        s = SpaceSavingSketch(5)
        words = [f"w{int(x)}" for x in rng.integers(0, 12, 400)]
        prev = [0] * 5
        for w in words:
            out = s.observe(w)
            now = [s.count_at(slot) for slot in range(5)]
            deltas = [b - a for a, b in zip(prev, now)]
            assert deltas[out.slot] == 1
            assert all(d == 0 for i, d in enumerate(deltas) if i != out.slot)
            prev = now


class TestSerialization:
    def test_tsv_round_trip_bit_exact(self):
        rng = np.random.default_rng(11)
        s = SpaceSavingSketch(6)
        feed(s, [f"w{int(x)}" for x in rng.integers(0, 15, 300)])
        buf = io.StringIO()
        s.to_tsv(buf)
        loaded = SpaceSavingSketch.from_tsv(io.StringIO(buf.getvalue()))
        buf2 = io.StringIO()
        loaded.to_tsv(buf2)
        assert buf.getvalue() == buf2.getvalue()
        assert loaded.observed == s.observed and loaded.items() == s.items()

    def test_round_trip_preserves_eviction_behavior(self):
        rng = np.random.default_rng(13)
        words = [f"w{int(x)}" for x in rng.integers(0, 25, 500)]
        s = SpaceSavingSketch(7)
        feed(s, words[:300])
        buf = io.StringIO()
        s.to_tsv(buf)
        clone = SpaceSavingSketch.from_tsv(io.StringIO(buf.getvalue()))
        for w in words[300:]:
            assert s.observe(w) == clone.observe(w)
        assert s.items() == clone.items()

    def test_bad_header(self):
        with pytest.raises(ValueError):
            SpaceSavingSketch.from_tsv(io.StringIO("not a header\n"))

    def test_empty_round_trip(self):
        buf = io.StringIO()
        SpaceSavingSketch(4).to_tsv(buf)
        loaded = SpaceSavingSketch.from_tsv(io.StringIO(buf.getvalue()))
        assert loaded.capacity == 4 and loaded.size() == 0
