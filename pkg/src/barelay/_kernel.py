"""Compiled slot loop shared by every simulated scheme.

Decisions that do not depend on the queue are vectorised by the caller and
passed in as ``d_base``; the loop applies the queue-dependent rules, moves
bits and keeps the running sums. An optional fluid FIFO records when each
chunk of bits entered the buffer so that per-bit delays can be measured.
"""

import numpy as np
from numba import njit

PLAIN = 0
OVERRIDE_ONE = 1  # source forced when Q <= R0 and O_S = 1
OVERRIDE_EMPTY = 2  # source forced when Q = 0 and O_S = 1
MIXED_DELAY = 3
CYCLE = 4  # k source slots, then n relay slots
BLOCK = 5  # source for the first xi N slots, relay afterwards
ALTERNATE = 6  # source and relay take turns, relay discards failures

# counters
ARRIVED = 0
DEPARTED = 1
QUEUE_SUM = 2
SILENT = 3
DROPPED = 4
POWER = 5
FIFO_DELAY = 6
FIFO_BITS = 7
MAX_QUEUE = 8
DISCARDED = 9
SLOTS = 10
N_COUNTERS = 11

# integer state
T = 0
HEAD = 1
COUNT = 2


@njit(cache=True)
def _grow(ring_t, ring_b, head, count):
    size = ring_t.shape[0]
    new_t = np.empty(2 * size, dtype=np.int64)
    new_b = np.empty(2 * size, dtype=np.float64)
    for j in range(count):
        new_t[j] = ring_t[(head + j) % size]
        new_b[j] = ring_b[(head + j) % size]
    return new_t, new_b


@njit(cache=True)
def run_chunk(
    d_base,
    o_s,
    cap,
    relay_pow,
    mode,
    fparams,
    iparams,
    fstate,
    istate,
    counters,
    ring_t,
    ring_b,
    source_silent,
    track_fifo,
):
    """Advance the queue over one chunk of slots.

    fparams = (s0, r0, capacity, gamma_s, q_max); iparams = (k, n, block_slots).
    With ``source_silent`` set the relay transmits in every slot and the
    loop stops as soon as the buffer is empty. Returns the FIFO ring
    arrays, which may have been reallocated.
    """
    s0 = fparams[0]
    r0 = fparams[1]
    capacity = fparams[2]
    gamma_s = fparams[3]
    q_max = fparams[4]
    k = iparams[0]
    n_relay = iparams[1]
    block = iparams[2]
    q = fstate[0]
    t = istate[T]
    head = istate[HEAD]
    count = istate[COUNT]
    for i in range(d_base.shape[0]):
        os = o_s[i]
        c = cap[i]
        if source_silent:
            d = 1
        elif mode == PLAIN:
            d = d_base[i]
        elif mode == OVERRIDE_ONE:
            d = 0 if (os and q <= r0 * (1.0 + 1e-12)) else d_base[i]
        elif mode == OVERRIDE_EMPTY:
            d = 0 if (os and q <= 0.0) else d_base[i]
        elif mode == MIXED_DELAY:
            if not os:
                d = 1
            elif c <= q and q <= q_max - s0:
                d = d_base[i]
            elif q > q_max - s0:
                d = 1
            else:
                d = 0
        elif mode == CYCLE:
            d = 0 if (t % (k + n_relay)) < k else 1
        elif mode == BLOCK:
            d = 0 if t < block else 1
        else:
            d = t % 2

        arr = 0.0
        dep = 0.0
        if d == 0:
            if os:
                counters[POWER] += gamma_s
                if q + s0 <= capacity * (1.0 + 1e-12):
                    arr = s0
                else:
                    counters[DROPPED] += 1.0
        else:
            counters[POWER] += relay_pow[i]
            dep = min(c, q)

        if track_fifo and arr > 0.0:
            size = ring_t.shape[0]
            if count == size:
                ring_t, ring_b = _grow(ring_t, ring_b, head, count)
                head = 0
                size = ring_t.shape[0]
            slot = (head + count) % size
            ring_t[slot] = t
            ring_b[slot] = arr
            count += 1

        if track_fifo and dep > 0.0:
            need = dep
            size = ring_t.shape[0]
            while need > 0.0 and count > 0:
                take = min(need, ring_b[head])
                counters[FIFO_DELAY] += take * (t - ring_t[head])
                counters[FIFO_BITS] += take
                ring_b[head] -= take
                need -= take
                if ring_b[head] <= 1e-12 * s0:
                    head = (head + 1) % size
                    count -= 1

        q = q + arr - dep
        if mode == ALTERNATE and d == 1:
            # the relay keeps nothing it failed to forward
            counters[DISCARDED] += q
            q = 0.0
            if track_fifo:
                head = 0
                count = 0
        if arr == 0.0 and dep == 0.0:
            counters[SILENT] += 1.0
        counters[ARRIVED] += arr
        counters[DEPARTED] += dep
        counters[QUEUE_SUM] += q
        if q > counters[MAX_QUEUE]:
            counters[MAX_QUEUE] = q
        counters[SLOTS] += 1.0
        t += 1
        if source_silent and q <= 0.0:
            break

    fstate[0] = q
    istate[T] = t
    istate[HEAD] = head
    istate[COUNT] = count
    return ring_t, ring_b
