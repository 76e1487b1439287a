"""Compiled inner loops of the sieve.

All mutable mining state lives in arrays bundled in :data:`KernelState`, so
:func:`run` can return to Python at any point (output buffer full, arena too
small) and resume later from exactly the same place. That is only possible
because the level loop is an explicit stack rather than recursion.

Level ``d`` holds the context whose elements form patterns of length
``d + 1``. Level 0 is the root database and reads from ``root``; deeper
levels read from ``arena``, where level ``d`` occupies ``[lo[d], top[d])``
and its child is always written starting at ``top[d]``.
"""
from collections import namedtuple

import numpy as np
from llvmlite import ir
from numba import njit
from numba.core import cgutils, types
from numba.extending import intrinsic

from .filters import deviation_and_epsilon

PLAIN, DELTA, VARINT = 0, 1, 2
DONE, OUTPUT_FULL, NEED_GROW = 0, 1, 2

# slots of the ``regs`` register array
R_DEPTH, R_OUTLEN, R_NEED, R_PEAK = 0, 1, 2, 3
N_REGS = 4

# rows of the per-level statistics matrix
S_BUILT, S_SCANNED, S_FILTERED, S_CYCLES = 0, 1, 2, 3
N_STATS = 4

KernelState = namedtuple(
    "KernelState",
    "names freqs addrs ends rate count txn lo top pos built refs grp glen kod new",
)
KernelConfig = namedtuple(
    "KernelConfig",
    "xi kmax mode filt sigma grouping n_root collect timing rootfreq var",
)


@intrinsic
def _readcyclecounter(typingctx):
    def codegen(context, builder, signature, args):
        fnty = ir.FunctionType(ir.IntType(64), [])
        fn = cgutils.get_or_insert_function(builder.module, fnty, "llvm.readcyclecounter")
        return builder.call(fn, [])

    return types.int64(), codegen


@njit(cache=True, nogil=True)
def cycles_now():
    return _readcyclecounter()


@njit(cache=True, nogil=True, inline="always")
def _read_varint(buf, p):
    v = 0
    shift = 0
    while True:
        b = np.int64(buf[p])
        p += 1
        v |= (b & 0x7F) << shift
        if b < 0x80:
            return v, p
        shift += 7


@njit(cache=True, nogil=True, inline="always")
def _write_varint(buf, p, v):
    while v >= 0x80:
        buf[p] = (v & 0x7F) | 0x80
        p += 1
        v >>= 7
    buf[p] = v
    return p + 1


@njit(cache=True, nogil=True, inline="always")
def mark_template(src, a, e, mode, kod, new):
    """Set kod/new for every tid of the list ``src[a:e]``; return (min, max) tid."""
    k = 0
    t = 0
    tmin = 0
    p = a
    while p < e:
        if mode == PLAIN:
            t = np.int64(src[p])
            p += 1
        elif mode == DELTA:
            t += np.int64(src[p])
            p += 1
        else:
            d, p = _read_varint(src, p)
            t += d
        k += 1
        kod[t - 1] = 1
        new[t - 1] = k
        if k == 1:
            tmin = t
    return tmin, t


@njit(cache=True, nogil=True, inline="always")
def clear_template(src, a, e, mode, kod):
    t = 0
    p = a
    while p < e:
        if mode == PLAIN:
            t = np.int64(src[p])
            p += 1
        elif mode == DELTA:
            t += np.int64(src[p])
            p += 1
        else:
            d, p = _read_varint(src, p)
            t += d
        kod[t - 1] = 0


@njit(cache=True, nogil=True, inline="always")
def intersect_list(src, a, e, flen, mode, kod, new, tmin, tmax, dst, w, xi):
    """Intersect one stored list with the marked template, appending renumbered hits.

    Returns ``(count, end)``; ``count`` is -1 when the list was abandoned
    because the remaining entries could no longer reach ``xi``. Returns the
    number of entries read as a third value.
    """
    start = w
    if mode == PLAIN:
        # absolute ids: trim the list to the [tmin, tmax] window up front
        p = a
        while p < e and src[p] < tmin:
            p += 1
        stop = e
        while stop > p and src[stop - 1] > tmax:
            stop -= 1
        while p < stop:
            if w - start + stop - p < xi:
                return -1, start, p - a
            block = min(p + 64, stop)
            for q in range(p, block):
                t = np.uint64(src[q] - 1)
                # branch-free append: write always, advance only on a hit
                dst[w] = new[t]
                w += kod[t]
            p = block
        return w - start, w, stop - a
    t = 0
    prev = 0
    cnt = 0
    idx = 0
    p = a
    while p < e:
        if mode == DELTA:
            t += np.int64(src[p])
            p += 1
        else:
            d, p = _read_varint(src, p)
            t += d
        idx += 1
        if t > tmax:
            break
        if t >= tmin and kod[t - 1]:
            v = np.int64(new[t - 1])
            if mode == DELTA:
                dst[w] = v - prev
                w += 1
            else:
                w = _write_varint(dst, w, v - prev)
            prev = v
            cnt += 1
        elif cnt + flen - idx < xi:
            return -1, start, idx
    return cnt, w, idx


@njit(cache=True, nogil=True, inline="always")
def _stable_rate(freqs, rate, d, n):
    # insertion sort of row d: n <= item count, and ties must keep index order
    for r in range(n):
        f = freqs[d, r]
        q = r
        while q > 0 and freqs[d, rate[d, q - 1]] > f:
            rate[d, q] = rate[d, q - 1]
            q -= 1
        rate[d, q] = r


@njit(cache=True, nogil=True, inline="always")
def build_child(st, cfg, root, arena, d, i, stats):
    """Construct level ``d + 1`` for the reference at rate position ``i`` of level ``d``."""
    src = root if d == 0 else arena
    mode = cfg.mode
    xi = cfg.xi
    j = st.rate[d, i]
    f = st.freqs[d, j]
    a = st.addrs[d, j]
    e = st.ends[d, j]
    nd = d + 1
    base = 0 if d == 0 else st.top[d]
    if i + 1 >= st.count[d]:
        # last in rate order: no candidates, so the child is empty without marking
        st.count[nd] = 0
        st.txn[nd] = f
        st.lo[nd] = base
        st.top[nd] = base
        st.glen[d] = 0
        stats[S_BUILT, nd] += 1
        return
    tmin, tmax = mark_template(src, a, e, mode, st.kod, st.new)
    w = base
    inf = 0
    glen = 0
    ref_var = cfg.var[st.names[d, j]]
    scanned = 0
    for ii in range(i + 1, st.count[d]):
        jt = st.rate[d, ii]
        name = st.names[d, jt]
        if ref_var >= 0 and cfg.var[name] == ref_var:
            continue
        start = w
        cnt, w, nread = intersect_list(
            src, st.addrs[d, jt], st.ends[d, jt], st.freqs[d, jt], mode,
            st.kod, st.new, tmin, tmax, arena, w, xi,
        )
        scanned += nread
        if cnt < xi:
            # fill index not advanced: the element is simply overwritten
            w = start
            continue
        if cfg.grouping and cnt == f:
            st.grp[d, glen] = name
            glen += 1
            w = start
            continue
        if cfg.filt:
            dev, eps = deviation_and_epsilon(cnt, f, cfg.rootfreq[name], cfg.n_root, cfg.sigma)
            if dev <= eps:
                stats[S_FILTERED, nd] += 1
                w = start
                continue
        st.names[nd, inf] = name
        st.freqs[nd, inf] = cnt
        st.addrs[nd, inf] = start
        st.ends[nd, inf] = w
        inf += 1
    clear_template(src, a, e, mode, st.kod)
    st.count[nd] = inf
    st.txn[nd] = f
    st.lo[nd] = base
    st.top[nd] = w
    st.glen[d] = glen
    _stable_rate(st.freqs, st.rate, nd, inf)
    stats[S_BUILT, nd] += 1
    stats[S_SCANNED, nd] += scanned


@njit(cache=True, nogil=True)
def run(st, cfg, root, arena, root_positions, out, regs, per_length, stats):
    """Advance the enclosed cycles until done, the output is full, or the arena is short."""
    kmax = cfg.kmax
    depth = regs[R_DEPTH]
    while depth >= 0:
        p = st.pos[depth]
        if depth == 0:
            if p >= root_positions.shape[0]:
                break
            i = root_positions[p]
        else:
            if p >= st.count[depth]:
                depth -= 1
                continue
            i = p
        j = st.rate[depth, i]
        f = st.freqs[depth, j]
        st.refs[depth] = st.names[depth, j]
        if st.built[depth] == 0:
            if depth + 1 < kmax:
                if depth == 0:
                    need = root.shape[0]
                else:
                    need = st.top[depth] + st.top[depth] - st.lo[depth]
                if need > arena.shape[0]:
                    regs[R_DEPTH] = depth
                    regs[R_NEED] = need
                    return NEED_GROW
                c0 = _readcyclecounter() if cfg.timing else 0
                build_child(st, cfg, root, arena, depth, i, stats)
                if cfg.timing:
                    stats[S_CYCLES, depth + 1] += _readcyclecounter() - c0
                if st.top[depth + 1] > regs[R_PEAK]:
                    regs[R_PEAK] = st.top[depth + 1]
            else:
                st.glen[depth] = 0
            st.built[depth] = 1

        total = depth + 1
        for lv in range(depth + 1):
            total += st.glen[lv]
        if cfg.collect:
            # record: support, n_items, then (item, group_len, group...) per item
            size = 2 + 2 * (depth + 1) + total - depth - 1
            o = regs[R_OUTLEN]
            if o + size > out.shape[0]:
                regs[R_DEPTH] = depth
                return OUTPUT_FULL
            out[o] = f
            out[o + 1] = depth + 1
            o += 2
            for lv in range(depth + 1):
                out[o] = st.refs[lv]
                out[o + 1] = st.glen[lv]
                o += 2
                for g in range(st.glen[lv]):
                    out[o] = st.grp[lv, g]
                    o += 1
            regs[R_OUTLEN] = o
        per_length[total] += 1

        st.built[depth] = 0
        st.pos[depth] += 1
        if depth + 1 < kmax and st.count[depth + 1] > 0:
            depth += 1
            st.pos[depth] = 0
            st.built[depth] = 0
    regs[R_DEPTH] = -1
    return DONE
