"""Site-level chain kernel used by every Monte Carlo experiment.

The configuration lives in a finite ``int8`` buffer: 1's to the left of the
hybrid zone, 0's to the right. Unlike adjacent pairs are kept in an unordered
array ``edges`` (left site of each pair) with an inverse map ``where``, so a
uniform pair is one array lookup and a move touches at most three pairs. The
extreme pairs ``lo`` and ``hi`` always exist (the two outer 10's), the zone
is ``buf[lo+1 .. hi]`` and ``|S| = hi - lo``.

Each step draws three uniforms: pair, voter-or-exclusion, then the voter
target or the swap acceptance. The continuous-time variant draws one more
for the exponential holding time of rate ``2N+1``.

All functions here go through :func:`evlab._accel.jit`; the same source runs
as plain Python when ``EVLAB_DISABLE_JIT=1``.
"""

import math

import numpy as np

from ._accel import jit

# columns of the observation table
COL_T = 0
COL_SIZE = 1
COL_N = 2
COL_F1 = 3
COL_F2 = 4
COL_RHO2 = 5
COL_MAX_SIZE = 6
COL_MAX_N = 7
N_COLS = 8


@jit
def _toggle(e, edges, where, count):
    k = where[e]
    if k >= 0:
        last = edges[count - 1]
        edges[k] = last
        where[last] = k
        where[e] = -1
        return count - 1
    edges[count] = e
    where[e] = count
    return count + 1


@jit
def _layout(word, length):
    """Centre ``word`` in a fresh buffer of ``length`` sites and index its pairs."""
    buf = np.empty(length, dtype=np.int8)
    start = (length - word.shape[0]) // 2
    for i in range(start):
        buf[i] = 1
    for i in range(word.shape[0]):
        buf[start + i] = word[i]
    for i in range(start + word.shape[0], length):
        buf[i] = 0
    edges = np.empty(length, dtype=np.int64)
    where = np.full(length, -1, dtype=np.int64)
    count = 0
    lo = -1
    hi = -1
    for i in range(length - 1):
        if buf[i] != buf[i + 1]:
            edges[count] = i
            where[i] = count
            count += 1
            if lo < 0:
                lo = i
            hi = i
    return buf, edges, where, count, lo, hi


@jit
def _zone_stats(buf, lo, hi):
    """``(f1, f2, rho2)`` of the zone ``buf[lo+1 .. hi]``."""
    f1 = 0
    sq_r = 0
    zeros = 0
    rho = 0
    run = 0
    prev = -1
    for i in range(lo + 1, hi + 1):
        b = buf[i]
        if b == 1:
            f1 += zeros
            sq_r += zeros * zeros
        else:
            zeros += 1
        if b == prev:
            run += 1
        else:
            rho += run * run
            run = 1
            prev = b
    rho += run * run
    sq_t = 0
    ones = 0
    for i in range(hi, lo, -1):
        if buf[i] == 1:
            ones += 1
        else:
            sq_t += ones * ones
    return f1, (sq_r + sq_t) // 2, rho


@jit
def run_chain(word, beta, p, horizon, stop_on_ground, sample_times, continuous,
              track_f1, rng):
    """Run one replica of the chain from the hybrid-zone ``word``.

    Parameters
    ----------
    word : ndarray of int8
        Hybrid zone of the start state (empty for the ground state).
    beta, p : float
        Voter probability and 01-swap acceptance.
    horizon : int
        Maximum number of steps.
    stop_on_ground : bool
        Stop at the first ``t >= 1`` with the ground state.
    sample_times : ndarray of int64
        Sorted step counts at which observables are recorded.
    continuous : bool
        Also accumulate exponential holding times.
    track_f1 : bool
        Follow ``f1`` step by step (``beta == 0`` only) and count the steps
        where it exceeds ``f1(start) + t``.
    rng : numpy.random.Generator

    Returns
    -------
    tau : int
        Hitting time of the ground state, ``-1`` if not hit by ``horizon``.
    tau_c : float
        Continuous clock at ``tau`` (``nan`` unless ``continuous`` and hit).
    table : ndarray of int64, shape (rows, 8)
        Observations at the sample times reached.
    clock : ndarray of float64
        Continuous clock at each recorded row.
    violations : int
        Steps with ``f1 > f1(start) + t`` (only when tracked).
    final : ndarray of int8
        Hybrid zone at the end of the run.
    """
    length = 64
    while length < 4 * (word.shape[0] + 2):
        length *= 2
    buf, edges, where, count, lo, hi = _layout(word, length)

    n_samples = sample_times.shape[0]
    table = np.zeros((n_samples, 8), dtype=np.int64)
    clock_at = np.zeros(n_samples, dtype=np.float64)
    row = 0

    exact_f1 = track_f1 and beta == 0.0
    f1_start, _, _ = _zone_stats(buf, lo, hi)
    f1_now = f1_start
    violations = 0
    max_size = hi - lo
    max_n = (count - 1) // 2
    clock = 0.0
    tau = -1
    tau_c = math.nan

    while row < n_samples and sample_times[row] == 0:
        f1, f2, rho = _zone_stats(buf, lo, hi)
        table[row, 0] = 0
        table[row, 1] = hi - lo
        table[row, 2] = (count - 1) // 2
        table[row, 3] = f1
        table[row, 4] = f2
        table[row, 5] = rho
        table[row, 6] = max_size
        table[row, 7] = max_n
        row += 1

    t = 0
    while t < horizon:
        t += 1
        if continuous:
            clock += -math.log(1.0 - rng.random()) / count
        i = edges[int(rng.random() * count)]
        u = rng.random()
        v = rng.random()
        changed = False
        lo_c = 0
        if u < beta:
            # voter: the pair becomes 00 or 11
            if v < 0.5:
                j = i if buf[i] == 1 else i + 1
                buf[j] = 0
            else:
                j = i if buf[i] == 0 else i + 1
                buf[j] = 1
            count = _toggle(j - 1, edges, where, count)
            count = _toggle(j, edges, where, count)
            lo_c = j - 1
            changed = True
        elif buf[i] == 1:
            if v < 1.0 - p:
                buf[i] = 0
                buf[i + 1] = 1
                count = _toggle(i - 1, edges, where, count)
                count = _toggle(i + 1, edges, where, count)
                lo_c = i - 1
                changed = True
                f1_now += 1
        else:
            if v < p:
                buf[i] = 1
                buf[i + 1] = 0
                count = _toggle(i - 1, edges, where, count)
                count = _toggle(i + 1, edges, where, count)
                lo_c = i - 1
                changed = True
                f1_now -= 1

        if changed:
            # pairs touched lie in lo_c .. lo_c + 2
            for e in range(lo_c, lo_c + 3):
                if where[e] >= 0:
                    if e < lo:
                        lo = e
                    if e > hi:
                        hi = e
            while where[lo] < 0:
                lo += 1
            while where[hi] < 0:
                hi -= 1
            if lo < 2 or hi > length - 4:
                zone = buf[lo + 1:hi + 1].copy()
                if 4 * (zone.shape[0] + 2) > length:
                    length *= 2
                buf, edges, where, count, lo, hi = _layout(zone, length)

        size = hi - lo
        if size > max_size:
            max_size = size
        n_blocks = (count - 1) // 2
        if n_blocks > max_n:
            max_n = n_blocks
        if exact_f1 and f1_now > f1_start + t:
            violations += 1

        while row < n_samples and sample_times[row] == t:
            f1, f2, rho = _zone_stats(buf, lo, hi)
            table[row, 0] = t
            table[row, 1] = size
            table[row, 2] = n_blocks
            table[row, 3] = f1
            table[row, 4] = f2
            table[row, 5] = rho
            table[row, 6] = max_size
            table[row, 7] = max_n
            clock_at[row] = clock
            row += 1

        if count == 1 and tau < 0:
            tau = t
            if continuous:
                tau_c = clock
            if stop_on_ground:
                break

    final = buf[lo + 1:hi + 1].copy()
    return tau, tau_c, table[:row], clock_at[:row], violations, final


@jit
def hitting_times(word, beta, p, cap, rng, out):
    """Fill ``out`` with ground-state hitting times of independent replicas.

    All replicas share ``rng``; ``-1`` marks a replica censored at ``cap``.
    Used where one stream per batch is enough (benchmarks, quick checks).
    """
    empty = np.zeros(0, dtype=np.int64)
    for r in range(out.shape[0]):
        tau, _, _, _, _, _ = run_chain(word, beta, p, cap, True, empty, False, False, rng)
        out[r] = tau
    return out


def word_array(word: str) -> np.ndarray:
    """``"0101"`` -> ``array([0, 1, 0, 1], dtype=int8)``."""
    return np.frombuffer(word.encode("ascii"), dtype=np.uint8).astype(np.int8) - ord("0")


def array_word(arr) -> str:
    return "".join("1" if x else "0" for x in arr)
