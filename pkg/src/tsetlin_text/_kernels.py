"""Numba kernels for clause evaluation and the feedback game.

Automaton states for one machine live in a ``(m, 2k)`` array: column ``2j``
controls literal ``x_j`` and column ``2j + 1`` controls ``NOT x_j``.  Two
``(m, W)`` uint64 include masks (plain and negated literals, bit ``j`` of word
``j >> 6``) mirror the actions of those automata and are kept in sync by the
feedback kernel whenever an automaton crosses the ``N``/``N+1`` boundary.

Every clause draws from its own SplitMix64 stream, derived from
``(example_seed, class_index, clause_index)``.  Updates therefore do not depend
on the order clauses are visited, which is what lets the ``prange`` variants
reproduce the serial ones bit for bit.
"""

import numpy as np
from numba import config, njit, prange

# The bundled TBB is often too old and numba warns when it probes it first.
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S6 = np.uint64(6)
_M63 = np.uint64(63)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_INV53 = 1.0 / 9007199254740992.0

TYPE_I = 1
TYPE_II = 2


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _next_uniform(state):
    state = state + _GOLDEN
    return state, np.float64(_mix(state) >> _S11) * _INV53


@njit(cache=True)
def clause_stream_seed(example_seed, class_index, clause_index):
    key = _mix(np.uint64(class_index) * _GOLDEN + np.uint64(clause_index) + _ONE)
    return _mix(np.uint64(example_seed) ^ key)


@njit(cache=True)
def _bit(words, j):
    return np.uint8((words[np.uint64(j) >> _S6] >> (np.uint64(j) & _M63)) & _ONE)


@njit(cache=True, inline="always")
def clause_output(plain, neg, xw, learning):
    """1 if the conjunction of included literals holds on ``xw``.

    A clause without literals outputs 1 while learning and 0 at inference.
    """
    nonempty = False
    for w in range(xw.shape[0]):
        p = plain[w]
        q = neg[w]
        if (p | q) != _ZERO:
            nonempty = True
            if (p & ~xw[w]) != _ZERO or (q & xw[w]) != _ZERO:
                return 0
    if nonempty or learning:
        return 1
    return 0


@njit(cache=True)
def _toggle(mask, j):
    mask[np.uint64(j) >> _S6] ^= _ONE << (np.uint64(j) & _M63)


@njit(cache=True)
def _next_rare(rng_state, position, log_keep, limit):
    """Next position after ``position`` hit by a 1/s event.

    Positions are independent Bernoulli(1/s) trials, so the gap between hits
    is geometric: one uniform per hit instead of one per automaton.
    """
    if log_keep == 0.0:  # s == 1: every position is hit
        return rng_state, position + 1
    rng_state, u = _next_uniform(rng_state)
    gap = np.log(1.0 - u) / log_keep
    if gap >= limit:
        return rng_state, limit
    return rng_state, position + 1 + np.int64(gap)


@njit(cache=True)
def _literal_value(xw, idx):
    return _bit(xw, idx >> 1) ^ np.uint8(idx & 1)


@njit(cache=True)
def _flip(plain, neg, idx):
    if idx & 1 == 0:
        _toggle(plain, idx >> 1)
    else:
        _toggle(neg, idx >> 1)


@njit(cache=True)
def _sweep(states, plain, neg, xw, want, n_states, limit):
    """Step up every automaton whose literal value equals ``want`` and whose
    state is below ``limit``; flip mask bits at the N -> N+1 crossing.

    Returns True if an included literal has value ``1 - want`` (Type I
    sanity check, meaningless for Type II).
    """
    k = states.shape[0] // 2
    bad = 0
    for w in range(xw.shape[0]):
        word = xw[w] if want == 1 else ~xw[w]
        p_flip = _ZERO
        n_flip = _ZERO
        base = w * 64
        for b in range(min(64, k - base)):
            shift = np.uint64(b)
            v = np.int64((word >> shift) & _ONE)
            i = 2 * (base + b)
            st = np.int64(states[i])
            up = v & np.int64(st < limit)
            states[i] = st + up
            p_flip |= np.uint64(up & np.int64(st == n_states)) << shift
            bad |= (1 - v) & np.int64(st > n_states)
            st = np.int64(states[i + 1])
            up = (1 - v) & np.int64(st < limit)
            states[i + 1] = st + up
            n_flip |= np.uint64(up & np.int64(st == n_states)) << shift
            bad |= v & np.int64(st > n_states)
        plain[w] ^= p_flip
        neg[w] ^= n_flip
    return bad != 0


_UNREACHABLE = "included false literal in a firing clause"


@njit(cache=True, inline="always")
def feedback_clause(states, plain, neg, xw, out, kind, s_inv, n_states, rng_state):
    """Apply Type I (``kind == 1``) or Type II feedback to one clause in place.

    ``out`` is the clause's Learning-mode output computed before any automaton
    of the clause was touched.  Returns 1 if Type I met an included false
    literal in a firing clause (a state the masks make unreachable), else 0.

    Type I in terms of a "rare" event of probability 1/s per automaton:
    when the clause fires, a true literal steps up (reward if included, penalty
    if excluded) unless rare, and a false literal steps down if rare; when the
    clause is silent, every rare automaton steps down (penalty if included,
    reward if excluded).  Rewards saturate at 1 and 2N.
    """
    n = states.shape[0]
    top = 2 * n_states
    if kind == TYPE_I:
        log_keep = np.log1p(-s_inv) if s_inv < 1.0 else 0.0
        rng_state, idx = _next_rare(rng_state, -1, log_keep, n)
        while idx < n:
            st = states[idx]
            if out == 0 or _literal_value(xw, idx) == 0:
                if st > 1:
                    states[idx] = st - 1
                    if st == n_states + 1:
                        _flip(plain, neg, idx)
            elif st < top:
                # Cancel the step-up the sweep below applies to true literals.
                states[idx] = st - 1
                if st == n_states + 1:
                    _flip(plain, neg, idx)
            rng_state, idx = _next_rare(rng_state, idx, log_keep, n)
        if out == 1 and _sweep(states, plain, neg, xw, 1, n_states, top):
            return 1
    elif out == 1:
        _sweep(states, plain, neg, xw, 0, n_states, n_states + 1)
    return 0


@njit(cache=True, inline="always")
def activation_probability(f, threshold, y):
    if f > threshold:
        f = threshold
    elif f < -threshold:
        f = -threshold
    if y == 1:
        return (threshold - f) / (2.0 * threshold)
    return (threshold + f) / (2.0 * threshold)


@njit(cache=True)
def _vote_sum_learning(plain, neg, polarity, xw):
    f = 0
    for c in range(plain.shape[0]):
        if clause_output(plain[c], neg[c], xw, True) == 1:
            f += polarity[c]
    return f


@njit(cache=True, inline="always")
def _activation_draw(example_seed, class_index, c):
    """First draw of clause ``c``'s stream decides whether it joins the round."""
    return _next_uniform(clause_stream_seed(example_seed, class_index, c))


@njit(cache=True, inline="always")
def _feedback_for(states, plain, neg, positive, xw, y, s_inv, n_states, rng_state):
    out = clause_output(plain, neg, xw, True)
    kind = TYPE_I if positive == (y == 1) else TYPE_II
    return feedback_clause(states, plain, neg, xw, out, kind, s_inv, n_states, rng_state)


@njit(cache=True)
def train_machine(states, plain, neg, polarity, xw, y, threshold, s_inv, n_states,
                  example_seed, class_index, activated):
    """One game round for one machine; returns the number of activated clauses."""
    f = _vote_sum_learning(plain, neg, polarity, xw)
    p = activation_probability(f, threshold, y)
    count = 0
    for c in range(states.shape[0]):
        rng_state, u = _activation_draw(example_seed, class_index, c)
        if u >= p:
            activated[c] = 0
            continue
        activated[c] = 1
        count += 1
        if _feedback_for(states[c], plain[c], neg[c], polarity[c] > 0, xw, y, s_inv, n_states,
                         rng_state):
            raise AssertionError(_UNREACHABLE)
    return count


@njit(cache=True, parallel=True)
def train_machine_parallel(states, plain, neg, polarity, xw, y, threshold, s_inv, n_states,
                           example_seed, class_index, activated):
    f = _vote_sum_learning(plain, neg, polarity, xw)
    p = activation_probability(f, threshold, y)
    count = 0
    bad = 0
    for c in prange(states.shape[0]):
        rng_state, u = _activation_draw(example_seed, class_index, c)
        if u >= p:
            activated[c] = 0
        else:
            activated[c] = 1
            count += 1
            bad += _feedback_for(states[c], plain[c], neg[c], polarity[c] > 0, xw, y, s_inv,
                                 n_states, rng_state)
    if bad:
        raise AssertionError(_UNREACHABLE)
    return count


@njit(cache=True)
def fit_epoch(states, plain, neg, polarity, Xw, labels, order, negatives, seeds,
              threshold, s_inv, n_states, activations):
    """Multi-class epoch: target class with y=1, one sampled class with y=0."""
    n_classes = states.shape[0]
    scratch = np.empty(states.shape[1], dtype=np.uint8)
    for i in range(order.shape[0]):
        e = order[i]
        t = labels[e]
        activations[t] += train_machine(states[t], plain[t], neg[t], polarity, Xw[e], 1,
                                        threshold, s_inv, n_states, seeds[i], t, scratch)
        if n_classes > 1:
            q = negatives[i]
            activations[q] += train_machine(states[q], plain[q], neg[q], polarity, Xw[e], 0,
                                            threshold, s_inv, n_states, seeds[i], q, scratch)


@njit(cache=True)
def fit_epoch_parallel(states, plain, neg, polarity, Xw, labels, order, negatives, seeds,
                       threshold, s_inv, n_states, activations):
    n_classes = states.shape[0]
    scratch = np.empty(states.shape[1], dtype=np.uint8)
    for i in range(order.shape[0]):
        e = order[i]
        t = labels[e]
        activations[t] += train_machine_parallel(states[t], plain[t], neg[t], polarity, Xw[e], 1,
                                                 threshold, s_inv, n_states, seeds[i], t, scratch)
        if n_classes > 1:
            q = negatives[i]
            activations[q] += train_machine_parallel(states[q], plain[q], neg[q], polarity, Xw[e],
                                                     0, threshold, s_inv, n_states, seeds[i], q,
                                                     scratch)


@njit(cache=True)
def clause_outputs(plain, neg, xw, learning):
    out = np.empty(plain.shape[0], dtype=np.uint8)
    for c in range(plain.shape[0]):
        out[c] = clause_output(plain[c], neg[c], xw, learning)
    return out


@njit(cache=True)
def class_sums(plain, neg, polarity, Xw):
    """Inference-mode vote sums, shape ``(n_docs, n_classes)``."""
    n_docs = Xw.shape[0]
    n_classes = plain.shape[0]
    sums = np.zeros((n_docs, n_classes), dtype=np.int64)
    for d in range(n_docs):
        for k in range(n_classes):
            f = 0
            for c in range(plain.shape[1]):
                if clause_output(plain[k, c], neg[k, c], Xw[d], False) == 1:
                    f += polarity[c]
            sums[d, k] = f
    return sums


@njit(cache=True)
def firing_counts(plain, neg, Xw):
    """Per-clause Inference-mode firing counts over a batch, ``(n_classes, m)``."""
    counts = np.zeros((plain.shape[0], plain.shape[1]), dtype=np.int64)
    for d in range(Xw.shape[0]):
        for k in range(plain.shape[0]):
            for c in range(plain.shape[1]):
                counts[k, c] += clause_output(plain[k, c], neg[k, c], Xw[d], False)
    return counts
