"""Pure-Python kernels: the reference implementation of the hot paths.

The compiled extension (``_speedups``) mirrors every function here with
identical semantics, including the order in which uniform variates are
consumed from the shared numpy Generator, so the two backends can be
cross-checked on the same seed.

Random draw conventions used by the training kernels:
  * one uniform per window position for the dynamic radius (when enabled),
    mapped to {1..C} by ``1 + floor(u * C)``;
  * one uniform per negative sample, mapped to an index by ``floor(u * n)``.
Both backends obtain uniforms from the generator's ``next_double`` stream.
"""

from __future__ import annotations

import math

import numpy as np

HIT, FILLED, REPLACED = 0, 1, 2

SCHEDULE_LINEAR, SCHEDULE_POLY = 0, 1

_NIL = -1


class SketchCore:
    """Space-saving counter state with O(1) amortized updates.

    Slots are kept in a doubly-linked list ordered by descending count;
    within a count group the most recently updated slot sits first. The
    global tail is therefore always the minimum-count, least-recently
    updated slot, which is the eviction victim.
    """

    __slots__ = (
        "capacity",
        "observed",
        "items",
        "counts",
        "slot_of",
        "_prev",
        "_next",
        "_head",
        "_tail",
        "_group_head",
        "_filled",
    )

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.observed = 0
        self.items: list[str | None] = [None] * capacity
        self.counts = [0] * capacity
        self.slot_of: dict[str, int] = {}
        self._prev = [_NIL] * capacity
        self._next = [_NIL] * capacity
        self._head = _NIL
        self._tail = _NIL
        self._group_head: dict[int, int] = {}
        self._filled = 0

    def size(self) -> int:
        return self._filled

    def min_count(self) -> int:
        return self.counts[self._tail] if self._filled else 0

    def _insert_before(self, s: int, x: int) -> None:
        p = self._prev[x]
        self._prev[s] = p
        self._next[s] = x
        self._prev[x] = s
        if p == _NIL:
            self._head = s
        else:
            self._next[p] = s

    def _insert_between(self, s: int, p: int, n: int) -> None:
        self._prev[s] = p
        self._next[s] = n
        if p == _NIL:
            self._head = s
        else:
            self._next[p] = s
        if n == _NIL:
            self._tail = s
        else:
            self._prev[n] = s

    def _bump(self, s: int) -> None:
        """Increment slot s's count and restore list order and group heads."""
        counts = self.counts
        prv = self._prev
        nxt = self._next
        group_head = self._group_head
        c = counts[s]
        h = group_head[c]
        p = prv[s]
        n = nxt[s]
        if h == s:
            if n != _NIL and counts[n] == c:
                group_head[c] = n
                rest = n
            else:
                del group_head[c]
                rest = _NIL
        else:
            rest = h
        # unlink s
        if p == _NIL:
            self._head = n
        else:
            nxt[p] = n
        if n == _NIL:
            self._tail = p
        else:
            prv[n] = p
        counts[s] = c + 1
        gh = group_head.get(c + 1, _NIL)
        if gh != _NIL:
            self._insert_before(s, gh)
        elif rest != _NIL:
            self._insert_before(s, rest)
        else:
            # s was alone in its group; its old gap is still the right place
            self._insert_between(s, p, n)
        group_head[c + 1] = s

    def observe(self, word: str) -> tuple[int, int, str | None]:
        """Apply the three-case update; returns (slot, kind, ejected_word)."""
        self.observed += 1
        s = self.slot_of.get(word, _NIL)
        if s != _NIL:
            self._bump(s)
            return s, HIT, None
        if self._filled < self.capacity:
            s = self._filled
            self._filled += 1
            self.items[s] = word
            self.slot_of[word] = s
            self.counts[s] = 1
            gh = self._group_head.get(1, _NIL)
            if gh != _NIL:
                self._insert_before(s, gh)
            else:
                self._insert_between(s, self._tail, _NIL)
            self._group_head[1] = s
            return s, FILLED, None
        s = self._tail  # minimum count, least recently updated
        ejected = self.items[s]
        del self.slot_of[ejected]
        self.items[s] = word
        self.slot_of[word] = s
        self._bump(s)
        return s, REPLACED, ejected

    def rows_in_order(self) -> list[tuple[int, str, int]]:
        """Occupied (slot, word, count) rows in canonical list order.

        The order is descending count, most-recently-updated first within a
        count; feeding these rows back through ``load_rows`` reproduces the
        eviction behavior exactly.
        """
        rows = []
        s = self._head
        while s != _NIL:
            rows.append((s, self.items[s], self.counts[s]))
            s = self._next[s]
        return rows

    def load_rows(self, rows, observed: int) -> None:
        """Rebuild state from canonical rows produced by ``rows_in_order``."""
        if self._filled:
            raise ValueError("load_rows requires an empty sketch")
        if len(rows) > self.capacity:
            raise ValueError("more rows than capacity")
        seen_slots = set()
        last = _NIL
        prev_count = None
        total = 0
        for slot, word, count in rows:
            if not (0 <= slot < self.capacity) or count < 1:
                raise ValueError("invalid sketch row")
            if slot in seen_slots or word in self.slot_of:
                raise ValueError("duplicate sketch row")
            if prev_count is not None and count > prev_count:
                raise ValueError("sketch rows out of order")
            seen_slots.add(slot)
            self.items[slot] = word
            self.counts[slot] = count
            self.slot_of[word] = slot
            self._prev[slot] = last
            if last == _NIL:
                self._head = slot
            else:
                self._next[last] = slot
            if count != prev_count:
                self._group_head[count] = slot
            last = slot
            prev_count = count
            total += count
        if seen_slots and seen_slots != set(range(len(rows))):
            raise ValueError("sketch slots must form a dense prefix")
        if last != _NIL:
            self._next[last] = _NIL
        self._tail = last
        self._filled = len(rows)
        if observed < total:
            raise ValueError("observed count below stored total")
        self.observed = observed


def sigmoid(x: float) -> float:
    """Numerically stable logistic function."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def slot_rate(
    t: int,
    rho0: float,
    rho_min: float,
    horizon: float,
    tau: float,
    kappa: float,
    schedule: int,
) -> float:
    """Learning rate at step counter t (t >= 1), floored at rho_min."""
    if schedule == SCHEDULE_LINEAR:
        rho = rho0 * (1.0 - (t - 1.0) / horizon)
    else:
        rho = rho0 * (tau / (tau + t - 1.0)) ** kappa
    return rho if rho > rho_min else rho_min


def _bump_steps(steps, kin, kout, negs) -> None:
    # one increment per distinct participating slot
    steps[kin] += 1
    if kout != kin:
        steps[kout] += 1
    done = {kin, kout}
    for k in negs:
        k = int(k)
        if k not in done:
            steps[k] += 1
            done.add(k)


def pair_step(
    tgt,
    ctx,
    steps,
    rho0,
    rho_min,
    horizon,
    tau,
    kappa,
    schedule,
    kin,
    kout,
    negs,
) -> None:
    """One skip-gram pair update with per-slot rates and pre-update caching.

    The input-row accumulator is built against each context row as it was
    before that row's own update within this call (the word2vec ordering).
    Rows are float32; dot products accumulate in float64.
    """
    vin = tgt[kin]
    vin64 = vin.astype(np.float64)
    rin = slot_rate(int(steps[kin]), rho0, rho_min, horizon, tau, kappa, schedule)
    vout = ctx[kout]
    a = 1.0 - sigmoid(float(vin64 @ vout))
    u = np.float32(rin * a) * vout
    rout = slot_rate(int(steps[kout]), rho0, rho_min, horizon, tau, kappa, schedule)
    vout += np.float32(rout * a) * vin
    for k in negs:
        k = int(k)
        vneg = ctx[k]
        a = -sigmoid(float(vin64 @ vneg))
        u += np.float32(rin * a) * vneg
        rneg = slot_rate(int(steps[k]), rho0, rho_min, horizon, tau, kappa, schedule)
        vneg += np.float32(rneg * a) * vin
    vin += u
    _bump_steps(steps, kin, kout, negs)


def _pair_fixed(tgt, ctx, kin, kout, negs, alpha: float) -> None:
    # same update with a single shared rate and no step counters
    vin = tgt[kin]
    vin64 = vin.astype(np.float64)
    vout = ctx[kout]
    a = np.float32(alpha * (1.0 - sigmoid(float(vin64 @ vout))))
    u = a * vout
    vout += a * vin
    for k in negs:
        k = int(k)
        vneg = ctx[k]
        a = np.float32(alpha * -sigmoid(float(vin64 @ vneg)))
        u += a * vneg
        vneg += a * vin
    vin += u


def train_stream_sentence(
    tgt,
    ctx,
    steps,
    rho0,
    rho_min,
    horizon,
    tau,
    kappa,
    schedule,
    slots,
    radius,
    dynamic,
    n_negative,
    res_values,
    res_size,
    generator,
) -> tuple[int, int]:
    """Train all windows of one subsampled sentence.

    ``slots`` holds the current sketch slot per retained token, -1 when the
    token's word has been ejected since insertion. A window whose tokens are
    not all resident is skipped whole. Returns (trained, skipped) counts.
    """
    j_max = len(slots) - 2 * radius
    trained = 0
    skipped = 0
    rand = generator.random
    negs = np.empty(n_negative, dtype=np.int64)
    for j in range(j_max):
        r = radius
        if dynamic:
            r = 1 + int(rand() * radius)
            if r > radius:
                r = radius
        end = j + 2 * r
        resident = True
        for pos in range(j, end + 1):
            if slots[pos] < 0:
                resident = False
                break
        if not resident:
            skipped += 1
            continue
        center = j + r
        kin = int(slots[center])
        for pos in range(j, end + 1):
            if pos == center:
                continue
            for i in range(n_negative):
                x = int(rand() * res_size)
                if x >= res_size:
                    x = res_size - 1
                negs[i] = res_values[x]
            pair_step(
                tgt, ctx, steps, rho0, rho_min, horizon, tau, kappa, schedule,
                kin, int(slots[pos]), negs,
            )
        trained += 1
    return trained, skipped


def train_batch_sentence(
    tgt,
    ctx,
    ids,
    alpha,
    radius,
    dynamic,
    n_negative,
    neg_table,
    generator,
) -> int:
    """Word2vec-style pass over one sentence: every position is a center and
    windows are truncated at the sentence edges. Returns pairs trained."""
    n = len(ids)
    table_len = len(neg_table)
    rand = generator.random
    negs = np.empty(n_negative, dtype=np.int64)
    pairs = 0
    for c in range(n):
        r = radius
        if dynamic:
            r = 1 + int(rand() * radius)
            if r > radius:
                r = radius
        lo = c - r
        if lo < 0:
            lo = 0
        hi = c + r
        if hi > n - 1:
            hi = n - 1
        kin = int(ids[c])
        for pos in range(lo, hi + 1):
            if pos == c:
                continue
            for i in range(n_negative):
                x = int(rand() * table_len)
                if x >= table_len:
                    x = table_len - 1
                negs[i] = neg_table[x]
            _pair_fixed(tgt, ctx, kin, int(ids[pos]), negs, alpha)
            pairs += 1
    return pairs
