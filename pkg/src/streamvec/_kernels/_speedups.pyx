# cython: language_level=3
"""Compiled kernels: drop-in twins of the functions in ``pure``.

Semantics, including the order in which uniforms are consumed from the
numpy Generator, match the pure-Python reference; only the arithmetic is
compiled. Uniforms come straight from the generator's next_double stream,
which is exactly what Generator.random() consumes.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, pow
from libc.stdint cimport int32_t, int64_t

from numpy.random cimport bitgen_t

import numpy as np

HIT, FILLED, REPLACED = 0, 1, 2
SCHEDULE_LINEAR, SCHEDULE_POLY = 0, 1

cdef int _HIT = 0, _FILLED = 1, _REPLACED = 2
cdef long _NIL = -1


cdef bitgen_t *_bitgen_of(object generator) except NULL:
    cdef object capsule = generator.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy Generator with a BitGenerator capsule")
    return <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")


# --------------------------------------------------------------------------
# space-saving sketch core
# --------------------------------------------------------------------------

cdef class SketchCore:
    """Space-saving counter state with O(1) amortized updates.

    Same layout as the pure version: slots in a doubly-linked list ordered
    by descending count, most recently updated first within a count group,
    so the global tail is always the eviction victim.
    """

    cdef readonly Py_ssize_t capacity
    cdef public long long observed
    cdef readonly list items
    cdef readonly dict slot_of
    cdef object _counts_arr
    cdef int64_t[::1] _counts
    cdef int32_t[::1] _prev
    cdef int32_t[::1] _next
    cdef object _prev_arr
    cdef object _next_arr
    cdef long _head
    cdef long _tail
    cdef dict _group_head
    cdef Py_ssize_t _filled

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if capacity >= 2**31:
            raise ValueError("capacity too large")
        self.capacity = capacity
        self.observed = 0
        self.items = [None] * capacity
        self.slot_of = {}
        self._counts_arr = np.zeros(capacity, dtype=np.int64)
        self._counts = self._counts_arr
        self._prev_arr = np.full(capacity, -1, dtype=np.int32)
        self._next_arr = np.full(capacity, -1, dtype=np.int32)
        self._prev = self._prev_arr
        self._next = self._next_arr
        self._head = _NIL
        self._tail = _NIL
        self._group_head = {}
        self._filled = 0

    @property
    def counts(self):
        return self._counts_arr

    def size(self):
        return self._filled

    def min_count(self):
        if self._filled == 0:
            return 0
        return self._counts[self._tail]

    cdef void _insert_before(self, long s, long x):
        cdef long p = self._prev[x]
        self._prev[s] = <int32_t>p
        self._next[s] = <int32_t>x
        self._prev[x] = <int32_t>s
        if p == _NIL:
            self._head = s
        else:
            self._next[p] = <int32_t>s

    cdef void _insert_between(self, long s, long p, long n):
        self._prev[s] = <int32_t>p
        self._next[s] = <int32_t>n
        if p == _NIL:
            self._head = s
        else:
            self._next[p] = <int32_t>s
        if n == _NIL:
            self._tail = s
        else:
            self._prev[n] = <int32_t>s

    cdef void _bump(self, long s):
        cdef long c, h, p, n, rest, gh
        cdef object key, new_key
        c = self._counts[s]
        key = c
        h = <long>self._group_head[key]
        p = self._prev[s]
        n = self._next[s]
        if h == s:
            if n != _NIL and self._counts[n] == c:
                self._group_head[key] = n
                rest = n
            else:
                del self._group_head[key]
                rest = _NIL
        else:
            rest = h
        if p == _NIL:
            self._head = n
        else:
            self._next[p] = <int32_t>n
        if n == _NIL:
            self._tail = p
        else:
            self._prev[n] = <int32_t>p
        self._counts[s] = c + 1
        new_key = c + 1
        gh = <long>self._group_head.get(new_key, _NIL)
        if gh != _NIL:
            self._insert_before(s, gh)
        elif rest != _NIL:
            self._insert_before(s, rest)
        else:
            self._insert_between(s, p, n)
        self._group_head[new_key] = s

    def observe(self, str word):
        """Apply the three-case update; returns (slot, kind, ejected_word)."""
        cdef long s, gh
        cdef object slot_obj, ejected
        self.observed += 1
        slot_obj = self.slot_of.get(word)
        if slot_obj is not None:
            s = <long>slot_obj
            self._bump(s)
            return s, _HIT, None
        if self._filled < self.capacity:
            s = self._filled
            self._filled += 1
            self.items[s] = word
            self.slot_of[word] = s
            self._counts[s] = 1
            gh = <long>self._group_head.get(1, _NIL)
            if gh != _NIL:
                self._insert_before(s, gh)
            else:
                self._insert_between(s, self._tail, _NIL)
            self._group_head[1] = s
            return s, _FILLED, None
        s = self._tail
        ejected = self.items[s]
        del self.slot_of[ejected]
        self.items[s] = word
        self.slot_of[word] = s
        self._bump(s)
        return s, _REPLACED, ejected

    def rows_in_order(self):
        """Occupied (slot, word, count) rows in canonical list order."""
        rows = []
        cdef long s = self._head
        while s != _NIL:
            rows.append((s, self.items[s], int(self._counts[s])))
            s = self._next[s]
        return rows

    def load_rows(self, rows, observed):
        """Rebuild state from canonical rows produced by ``rows_in_order``."""
        if self._filled:
            raise ValueError("load_rows requires an empty sketch")
        if len(rows) > self.capacity:
            raise ValueError("more rows than capacity")
        seen_slots = set()
        cdef long last = _NIL
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
            self._counts[slot] = count
            self.slot_of[word] = slot
            self._prev[slot] = <int32_t>last
            if last == _NIL:
                self._head = slot
            else:
                self._next[last] = <int32_t>slot
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


# --------------------------------------------------------------------------
# gradient kernels
# --------------------------------------------------------------------------

cdef inline double _sigmoid(double x) noexcept:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _rate(int64_t t, double rho0, double rho_min, double horizon,
                         double tau, double kappa, int schedule) noexcept:
    cdef double rho
    if schedule == 0:
        rho = rho0 * (1.0 - (t - 1.0) / horizon)
    else:
        rho = rho0 * pow(tau / (tau + t - 1.0), kappa)
    return rho if rho > rho_min else rho_min


def sigmoid(double x):
    """Numerically stable logistic function."""
    return _sigmoid(x)


def slot_rate(t, rho0, rho_min, horizon, tau, kappa, schedule):
    """Learning rate at step counter t (t >= 1), floored at rho_min."""
    return _rate(t, rho0, rho_min, horizon, tau, kappa, schedule)


cdef void _pair_slot(float[:, ::1] tgt, float[:, ::1] ctx, int64_t[::1] steps,
                     double rho0, double rho_min, double horizon,
                     double tau, double kappa, int schedule,
                     Py_ssize_t kin, Py_ssize_t kout,
                     int64_t *negs, Py_ssize_t n_negs, float *u) noexcept:
    cdef Py_ssize_t dim = tgt.shape[1]
    cdef double dot, a, rin
    cdef float g_u, g_c
    cdef Py_ssize_t d, i, j, k
    cdef bint dup
    rin = _rate(steps[kin], rho0, rho_min, horizon, tau, kappa, schedule)
    dot = 0.0
    for d in range(dim):
        dot += <double>tgt[kin, d] * <double>ctx[kout, d]
    a = 1.0 - _sigmoid(dot)
    g_u = <float>(rin * a)
    g_c = <float>(_rate(steps[kout], rho0, rho_min, horizon, tau, kappa, schedule) * a)
    for d in range(dim):
        u[d] = g_u * ctx[kout, d]
    for d in range(dim):
        ctx[kout, d] += g_c * tgt[kin, d]
    for i in range(n_negs):
        k = negs[i]
        dot = 0.0
        for d in range(dim):
            dot += <double>tgt[kin, d] * <double>ctx[k, d]
        a = -_sigmoid(dot)
        g_u = <float>(rin * a)
        g_c = <float>(_rate(steps[k], rho0, rho_min, horizon, tau, kappa, schedule) * a)
        for d in range(dim):
            u[d] += g_u * ctx[k, d]
        for d in range(dim):
            ctx[k, d] += g_c * tgt[kin, d]
    for d in range(dim):
        tgt[kin, d] += u[d]
    # one step-counter increment per distinct participating slot
    steps[kin] += 1
    if kout != kin:
        steps[kout] += 1
    for i in range(n_negs):
        k = negs[i]
        if k == kin or k == kout:
            continue
        dup = False
        for j in range(i):
            if negs[j] == k:
                dup = True
                break
        if not dup:
            steps[k] += 1


cdef void _pair_fixed(float[:, ::1] tgt, float[:, ::1] ctx,
                      Py_ssize_t kin, Py_ssize_t kout,
                      int64_t *negs, Py_ssize_t n_negs,
                      double alpha, float *u) noexcept:
    cdef Py_ssize_t dim = tgt.shape[1]
    cdef double dot
    cdef float g
    cdef Py_ssize_t d, i, k
    dot = 0.0
    for d in range(dim):
        dot += <double>tgt[kin, d] * <double>ctx[kout, d]
    g = <float>(alpha * (1.0 - _sigmoid(dot)))
    for d in range(dim):
        u[d] = g * ctx[kout, d]
    for d in range(dim):
        ctx[kout, d] += g * tgt[kin, d]
    for i in range(n_negs):
        k = negs[i]
        dot = 0.0
        for d in range(dim):
            dot += <double>tgt[kin, d] * <double>ctx[k, d]
        g = <float>(alpha * -_sigmoid(dot))
        for d in range(dim):
            u[d] += g * ctx[k, d]
        for d in range(dim):
            ctx[k, d] += g * tgt[kin, d]
    for d in range(dim):
        tgt[kin, d] += u[d]


def pair_step(float[:, ::1] tgt, float[:, ::1] ctx, int64_t[::1] steps,
              double rho0, double rho_min, double horizon,
              double tau, double kappa, int schedule,
              Py_ssize_t kin, Py_ssize_t kout, negs):
    """One skip-gram pair update with per-slot rates and pre-update caching."""
    cdef object negs_arr = np.ascontiguousarray(negs, dtype=np.int64)
    cdef int64_t[::1] negs_mv = negs_arr
    cdef object u_arr = np.empty(tgt.shape[1], dtype=np.float32)
    cdef float[::1] u = u_arr
    cdef int64_t *negs_ptr = NULL
    if negs_mv.shape[0] > 0:
        negs_ptr = &negs_mv[0]
    _pair_slot(tgt, ctx, steps, rho0, rho_min, horizon, tau, kappa, schedule,
               kin, kout, negs_ptr, negs_mv.shape[0], &u[0])


def train_stream_sentence(float[:, ::1] tgt, float[:, ::1] ctx, int64_t[::1] steps,
                          double rho0, double rho_min, double horizon,
                          double tau, double kappa, int schedule,
                          int64_t[::1] slots, Py_ssize_t radius, int dynamic,
                          Py_ssize_t n_negative, int64_t[::1] res_values,
                          Py_ssize_t res_size, object generator):
    """Train all windows of one subsampled sentence; see the pure twin."""
    cdef bitgen_t *bg = _bitgen_of(generator)
    cdef Py_ssize_t j_max = slots.shape[0] - 2 * radius
    cdef long trained = 0, skipped = 0
    cdef object negs_arr = np.empty(max(n_negative, 1), dtype=np.int64)
    cdef int64_t[::1] negs = negs_arr
    cdef object u_arr = np.empty(tgt.shape[1], dtype=np.float32)
    cdef float[::1] u = u_arr
    cdef Py_ssize_t j, r, end, pos, center, i, x
    cdef bint resident
    for j in range(j_max):
        r = radius
        if dynamic:
            r = 1 + <Py_ssize_t>(bg.next_double(bg.state) * radius)
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
        for pos in range(j, end + 1):
            if pos == center:
                continue
            for i in range(n_negative):
                x = <Py_ssize_t>(bg.next_double(bg.state) * res_size)
                if x >= res_size:
                    x = res_size - 1
                negs[i] = res_values[x]
            _pair_slot(tgt, ctx, steps, rho0, rho_min, horizon, tau, kappa, schedule,
                       slots[center], slots[pos], &negs[0], n_negative, &u[0])
        trained += 1
    return trained, skipped


def train_batch_sentence(float[:, ::1] tgt, float[:, ::1] ctx,
                         int64_t[::1] ids, double alpha, Py_ssize_t radius,
                         int dynamic, Py_ssize_t n_negative,
                         int64_t[::1] neg_table, object generator):
    """Word2vec-style pass over one sentence with truncated edge windows."""
    cdef bitgen_t *bg = _bitgen_of(generator)
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t table_len = neg_table.shape[0]
    cdef long pairs = 0
    cdef object negs_arr = np.empty(max(n_negative, 1), dtype=np.int64)
    cdef int64_t[::1] negs = negs_arr
    cdef object u_arr = np.empty(tgt.shape[1], dtype=np.float32)
    cdef float[::1] u = u_arr
    cdef Py_ssize_t c, r, lo, hi, pos, i, x
    for c in range(n):
        r = radius
        if dynamic:
            r = 1 + <Py_ssize_t>(bg.next_double(bg.state) * radius)
            if r > radius:
                r = radius
        lo = c - r
        if lo < 0:
            lo = 0
        hi = c + r
        if hi > n - 1:
            hi = n - 1
        for pos in range(lo, hi + 1):
            if pos == c:
                continue
            for i in range(n_negative):
                x = <Py_ssize_t>(bg.next_double(bg.state) * table_len)
                if x >= table_len:
                    x = table_len - 1
                negs[i] = neg_table[x]
            _pair_fixed(tgt, ctx, ids[c], ids[pos], &negs[0], n_negative, alpha, &u[0])
            pairs += 1
    return pairs
