"""Per-frame decoding kernels (numba-compiled unless disabled).

Conventions shared by every kernel:

* ``gbits`` is the unpacked (k, n) uint8 generator.
* ``A`` is a packed (k, W) matrix over ``n + k`` columns holding the column
  permuted systematic generator ``[I | P1 | P2]`` followed by the k x k
  transform ``T`` with ``T . G . Pi = [I | P1 | P2]``.
* ``zt`` / ``relt`` are the hard decisions / reliabilities in permuted order.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit
from .channel import channel_llr
from .gf2 import staircase_reduce_rows
from .rng import derive, stream_bit

ONE = np.uint64(1)
INF = np.inf

LC_ROSD = 0
LC_OSD = 1
OSD = 2
ML = 3
MAX_DELTA = 20


@njit(nogil=True)
def getbit(A, r, c):
    return (A[r, c >> 6] >> np.uint64(c & 63)) & ONE


@njit(nogil=True)
def setbit(A, r, c):
    A[r, c >> 6] |= ONE << np.uint64(c & 63)


@njit(nogil=True)
def soft_weight(e, rel):
    """Sequential sum of rel[i] over e[i] == 1 (the canonical soft weight)."""
    g = 0.0
    for i in range(e.shape[0]):
        if e[i]:
            g += rel[i]
    return g


@njit(nogil=True)
def rosd_basis(rel, starts, ends, k, n, perm):
    """Most reliable column of each staircase, then the rest by decreasing reliability."""
    used = np.zeros(n, np.uint8)
    for i in range(k):
        best = starts[i]
        bv = rel[best]
        for j in range(starts[i] + 1, ends[i]):
            if rel[j] > bv:
                best = j
                bv = rel[j]
        perm[i] = best
        used[best] = 1
    rem = np.empty(n - k, np.int64)
    c = 0
    for j in range(n):
        if used[j] == 0:
            rem[c] = j
            c += 1
    keys = np.empty(n - k, np.float64)
    for t in range(n - k):
        keys[t] = -rel[rem[t]]
    order = np.argsort(keys, kind="mergesort")
    for t in range(n - k):
        perm[k + t] = rem[order[t]]


@njit(nogil=True)
def pack_permuted(gbits, perm, k, n, out):
    """out = packed [G[:, perm] | I_k]."""
    for r in range(k):
        for j in range(out.shape[1]):
            out[r, j] = 0
        for c in range(n):
            if gbits[r, perm[c]]:
                setbit(out, r, c)
        setbit(out, r, n + r)


@njit(nogil=True)
def mrb_gauss_jordan(gbits, rel, k, n, perm, work, out):
    """Most reliable basis by serial Gauss-Jordan with column pivoting.

    Columns are visited by decreasing reliability (ties: lowest index); a
    column joins the basis when it is independent of those already chosen.
    ``perm`` receives the basis columns followed by the others in reliability
    order; ``out`` the permuted systematic matrix plus transform.  Returns
    False when G is rank deficient.
    """
    for r in range(k):
        for j in range(work.shape[1]):
            work[r, j] = 0
        for c in range(n):
            if gbits[r, c]:
                setbit(work, r, c)
        setbit(work, r, n + r)
    keys = np.empty(n, np.float64)
    for j in range(n):
        keys[j] = -rel[j]
    order = np.argsort(keys, kind="mergesort")
    inb = np.zeros(n, np.uint8)
    npiv = 0
    W = work.shape[1]
    for t in range(n):
        if npiv == k:
            break
        c = order[t]
        piv = -1
        for r in range(npiv, k):
            if getbit(work, r, c):
                piv = r
                break
        if piv < 0:
            continue
        if piv != npiv:
            for j in range(W):
                tmp = work[piv, j]
                work[piv, j] = work[npiv, j]
                work[npiv, j] = tmp
        for r in range(k):
            if r != npiv and getbit(work, r, c):
                for j in range(W):
                    work[r, j] ^= work[npiv, j]
        perm[npiv] = c
        inb[c] = 1
        npiv += 1
    if npiv < k:
        return False
    p = k
    for t in range(n):
        c = order[t]
        if inb[c] == 0:
            perm[p] = c
            p += 1
    for r in range(k):
        for j in range(W):
            out[r, j] = 0
        for c in range(n):
            if getbit(work, r, perm[c]):
                setbit(out, r, c)
        for j in range(k):
            if getbit(work, r, n + j):
                setbit(out, r, n + j)
    return True


@njit(nogil=True)
def extract_parts(A, zt, k, n, delta):
    """Split ``[I | P1 | P2]``: P1 rows as integers, P2 rows packed, s0 and base.

    ``s0 = zL . P1 ^ zM`` is the local-constraint syndrome and
    ``base = zL . P2 ^ zR`` the right part implied by the all-zero TEP.
    """
    nR = n - k - delta
    WR = max(1, (nR + 63) >> 6)
    p1 = np.zeros(k, np.int64)
    rR = np.zeros((k, WR), np.uint64)
    for i in range(k):
        v = 0
        for j in range(delta):
            if getbit(A, i, k + j):
                v |= 1 << j
        p1[i] = v
        for j in range(nR):
            if getbit(A, i, k + delta + j):
                setbit(rR, i, j)
    s0 = 0
    base = np.zeros((1, WR), np.uint64)
    for j in range(delta):
        if zt[k + j]:
            s0 ^= 1 << j
    for j in range(nR):
        if zt[k + delta + j]:
            setbit(base, 0, j)
    for i in range(k):
        if zt[i]:
            s0 ^= p1[i]
            for w in range(WR):
                base[0, w] ^= rR[i, w]
    return p1, rR, base[0], s0


@njit(nogil=True)
def right_weight(base, rR, eL, k, relR, nR, tmp):
    """Soft weight of eR = base ^ eL . P2."""
    WR = tmp.shape[0]
    for w in range(WR):
        tmp[w] = base[w]
    for i in range(k):
        if eL[i]:
            for w in range(WR):
                tmp[w] ^= rR[i, w]
    g = 0.0
    for j in range(nR):
        if (tmp[j >> 6] >> np.uint64(j & 63)) & ONE:
            g += relR[j]
    return g


@njit(nogil=True)
def _heap_less(a, b, nf):
    return nf[a] < nf[b] or (nf[a] == nf[b] and a < b)


@njit(nogil=True)
def _heap_push(heap, hs, node, nf):
    i = hs
    while i > 0:
        p = (i - 1) >> 1
        if _heap_less(heap[p], node, nf):
            break
        heap[i] = heap[p]
        i = p
    heap[i] = node
    return hs + 1


@njit(nogil=True)
def _heap_pop(heap, hs, nf):
    top = heap[0]
    hs -= 1
    if hs > 0:
        last = heap[hs]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= hs:
                break
            if c + 1 < hs and _heap_less(heap[c + 1], heap[c], nf):
                c += 1
            if _heap_less(heap[c], last, nf):
                heap[i] = heap[c]
                i = c
            else:
                break
        heap[i] = last
    return top, hs


@njit(nogil=True)
def _grow(a, cap):
    b = np.empty(cap, a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(nogil=True)
def _seg_less(key, idx, a, b):
    return key[a] < key[b] or (key[a] == key[b] and idx[a] < idx[b])


@njit(nogil=True)
def _seg_sift(key, idx, aux, lo, size, i):
    """Sift-down inside the min-heap stored in key/idx/aux[lo:lo+size]."""
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _seg_less(key, idx, lo + c + 1, lo + c):
            c += 1
        if _seg_less(key, idx, lo + c, lo + i):
            a = lo + c
            b = lo + i
            key[a], key[b] = key[b], key[a]
            idx[a], idx[b] = idx[b], idx[a]
            aux[a], aux[b] = aux[b], aux[a]
            i = c
        else:
            break


@njit(nogil=True)
def _seg_heapify(key, idx, aux, lo, size):
    for i in range(size // 2 - 1, -1, -1):
        _seg_sift(key, idx, aux, lo, size, i)


@njit(nogil=True)
def _seg_drop(key, idx, aux, lo, size):
    """Remove the minimum of a segment heap of the given size."""
    last = lo + size - 1
    key[lo] = key[last]
    idx[lo] = idx[last]
    aux[lo] = aux[last]
    _seg_sift(key, idx, aux, lo, size - 1, 0)


@njit(nogil=True)
def tep_search(p1, s0, rel, rR, base, relR, k, delta, lmax, shortcut, alpha, record, rec_eL, rec_eM, rec_g, best_eL):
    """Serial list Viterbi search over (eL, eM) under the local constraint.

    The trellis has k stages and 2**delta states (state = running eL . P1);
    a branch with e_i = 1 costs rel[i], the terminal cost of state S is the
    soft weight of eM = S ^ s0 on rel[k:k+delta].  A forward Viterbi pass
    gives, for every node, the cost of its best completion back to the
    start.  Paths are then listed best-first in the tree-trellis manner: a
    path is its parent plus one sidetrack (a non-survivor branch) below the
    parent's own sidetrack, followed by survivors.  Each path keeps a small
    heap of its sidetracks and only the cheapest unexplored one of each path
    sits in the global heap, so paths come out in non-decreasing partial
    soft weight with O(k) work apiece.

    Search mode (record=False): each candidate is completed through P2 and the
    minimum full soft weight kept; stops after ``lmax`` candidates or as soon
    as the next partial weight is >= the best full weight (optimal).
    Record mode: the first ``lmax`` candidates are written to rec_* arrays.

    Returns (best full soft weight, candidates examined, optimal flag).
    """
    nst = 1 << delta
    nR = relR.shape[0]
    tmp = np.empty(base.shape[0], np.uint64)
    eL = np.zeros(k, np.uint8)
    count = 0
    best = INF
    zero_done = False

    if shortcut and not record and s0 == 0:
        # the all-zero TEP has partial weight 0, hence comes first
        best = right_weight(base, rR, eL, k, relR, nR, tmp)
        for i in range(k):
            best_eL[i] = 0
        count = 1
        zero_done = True
        minrel = INF
        for i in range(k + delta):
            if rel[i] < minrel:
                minrel = rel[i]
        if best <= minrel:
            return best, count, True
        if count >= lmax:
            return best, count, False

    tw = np.zeros(nst, np.float64)
    for x in range(1, nst):
        low = x & (-x)
        j = 0
        while (low >> j) != 1:
            j += 1
        tw[x] = tw[x ^ low] + rel[k + j]

    for idx in range((k + 1) * nst):
        alpha[idx] = INF
    alpha[0] = 0.0
    for i in range(k):
        cur = i * nst
        nxt = cur + nst
        p = p1[i]
        r = rel[i]
        for s in range(nst):
            a = alpha[cur + s]
            if a < INF:
                if a < alpha[nxt + s]:
                    alpha[nxt + s] = a
                b = a + r
                t = s ^ p
                if b < alpha[nxt + t]:
                    alpha[nxt + t] = b

    # terminal states, lazily ordered by total cost
    rkey = np.empty(nst, np.float64)
    ridx = np.empty(nst, np.int64)
    raux = np.zeros(nst, np.int64)
    nroot = 0
    last = k * nst
    for s in range(nst):
        a = alpha[last + s]
        if a < INF:
            rkey[nroot] = tw[s ^ s0] + a
            ridx[nroot] = s
            nroot += 1
    _seg_heapify(rkey, ridx, raux, 0, nroot)

    # global heap of entries (parent path or -1 for the root, cost)
    ecap = 64
    ecost = np.empty(ecap, np.float64)
    epar = np.empty(ecap, np.int64)
    heap = np.empty(ecap, np.int64)
    ne = 0
    hs = 0
    # emitted paths: bits, cost and a segment heap of sidetracks
    pcap = 64
    pbits = np.empty(pcap * k, np.uint8)
    pcost = np.empty(pcap, np.float64)
    coff = np.empty(pcap, np.int64)
    csize = np.empty(pcap, np.int64)
    ccap = 64 * (k + 1)
    ckey = np.empty(ccap, np.float64)
    cstage = np.empty(ccap, np.int64)
    cstate = np.empty(ccap, np.int64)
    ctop = 0
    npath = 0

    if nroot > 0:
        ecost[0] = rkey[0]
        epar[0] = -1
        hs = _heap_push(heap, hs, 0, ecost)
        ne = 1

    optimal = False
    exhausted = True
    while hs > 0:
        top = heap[0]
        if count > 0 and ecost[top] >= best:
            optimal = True
            exhausted = False
            break
        if count >= lmax:
            exhausted = False
            break
        ent, hs = _heap_pop(heap, hs, ecost)
        par = epar[ent]
        cost = ecost[ent]
        if ne + 2 > ecap:
            ecap *= 2
            ecost = _grow(ecost, ecap)
            epar = _grow(epar, ecap)
            heap = _grow(heap, ecap)
        if npath + 1 > pcap:
            pcap *= 2
            pbits = _grow(pbits, pcap * k)
            pcost = _grow(pcost, pcap)
            coff = _grow(coff, pcap)
            csize = _grow(csize, pcap)
        if ctop + k > ccap:
            ccap = 2 * ccap + k
            ckey = _grow(ckey, ccap)
            cstage = _grow(cstage, ccap)
            cstate = _grow(cstate, ccap)
        q = npath
        npath += 1
        qo = q * k
        if par < 0:
            s = ridx[0]
            _seg_drop(rkey, ridx, raux, 0, nroot)
            nroot -= 1
            if nroot > 0:
                ecost[ne] = rkey[0]
                epar[ne] = -1
                hs = _heap_push(heap, hs, ne, ecost)
                ne += 1
            st = k
        else:
            lo = coff[par]
            i = cstage[lo]
            si = cstate[lo]
            _seg_drop(ckey, cstage, cstate, lo, csize[par])
            csize[par] -= 1
            if csize[par] > 0:
                ecost[ne] = pcost[par] + ckey[lo]
                epar[ne] = par
                hs = _heap_push(heap, hs, ne, ecost)
                ne += 1
            po = par * k
            for t in range(i, k):
                pbits[qo + t] = pbits[po + t]
            bit = 1 - pbits[po + i - 1]
            pbits[qo + i - 1] = bit
            s = si ^ p1[i - 1] if bit else si
            st = i - 1
        pcost[q] = cost
        lo = ctop
        nc = 0
        while st >= 1:
            p = p1[st - 1]
            a0 = alpha[(st - 1) * nst + s]
            a1 = alpha[(st - 1) * nst + (s ^ p)] + rel[st - 1]
            if a1 < a0:
                bit = 1
                dlt = a0 - a1
                nxt = s ^ p
            else:
                bit = 0
                dlt = a1 - a0
                nxt = s
            if dlt < INF:
                ckey[lo + nc] = dlt
                cstage[lo + nc] = st
                cstate[lo + nc] = s
                nc += 1
            pbits[qo + st - 1] = bit
            s = nxt
            st -= 1
        coff[q] = lo
        csize[q] = nc
        ctop += nc
        if nc > 0:
            _seg_heapify(ckey, cstage, cstate, lo, nc)
            ecost[ne] = cost + ckey[lo]
            epar[ne] = q
            hs = _heap_push(heap, hs, ne, ecost)
            ne += 1

        allzero = True
        sk = 0
        for t in range(k):
            eL[t] = pbits[qo + t]
            if eL[t]:
                allzero = False
                sk ^= p1[t]
        if zero_done and allzero and sk == 0:
            continue
        if record:
            em = sk ^ s0
            glm = tw[em]
            for t in range(k):
                rec_eL[count, t] = eL[t]
                if eL[t]:
                    glm += rel[t]
            for j in range(delta):
                rec_eM[count, j] = (em >> j) & 1
            rec_g[count] = glm
            count += 1
        else:
            g = cost + right_weight(base, rR, eL, k, relR, nR, tmp)
            count += 1
            if g < best:
                best = g
                for t in range(k):
                    best_eL[t] = eL[t]
    if exhausted:
        optimal = True
    return best, count, optimal



@njit(nogil=True)
def osd_search(A, zt, relt, k, n, order, best_eL):
    """Original OSD: every TEP of Hamming weight <= order on the basis."""
    p1, rR, base, s0 = extract_parts(A, zt, k, n, 0)
    relR = relt[k:]
    nR = n - k
    tmp = np.empty(base.shape[0], np.uint64)
    eL = np.zeros(k, np.uint8)
    best = INF
    count = 0
    for w in range(0, order + 1):
        if w > k:
            break
        idx = np.arange(w)
        while True:
            glm = 0.0
            for t in range(w):
                eL[idx[t]] = 1
                glm += relt[idx[t]]
            g = glm + right_weight(base, rR, eL, k, relR, nR, tmp)
            count += 1
            if g < best:
                best = g
                for i in range(k):
                    best_eL[i] = eL[i]
            for t in range(w):
                eL[idx[t]] = 0
            i = w - 1
            while i >= 0 and idx[i] == k - w + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, w):
                idx[j] = idx[j - 1] + 1
    return best, count


@njit(nogil=True)
def _lex_less(c, d, n):
    """Codeword c precedes d lexicographically (coordinate 0 most significant)."""
    for w in range(c.shape[0]):
        x = c[w] ^ d[w]
        if x != 0:
            low = x & (~x + ONE)
            return (c[w] & low) == 0
    return False


@njit(nogil=True)
def ml_search(gw, z, rel, k, n, best_u):
    """Exhaustive ML: minimum soft weight codeword, lexicographic tie-break."""
    W = gw.shape[1]
    zw = np.zeros((1, W), np.uint64)
    for j in range(n):
        if z[j]:
            setbit(zw, 0, j)
    cur = np.zeros(W, np.uint64)
    bestc = np.zeros(W, np.uint64)
    msg = 0
    bestmsg = 0
    best = INF
    for t in range(1 << k):
        if t > 0:
            low = t & (-t)
            b = 0
            while (low >> b) != 1:
                b += 1
            for w in range(W):
                cur[w] ^= gw[b, w]
            msg ^= low
        g = 0.0
        for j in range(n):
            if ((cur[j >> 6] ^ zw[0, j >> 6]) >> np.uint64(j & 63)) & ONE:
                g += rel[j]
        if g < best or (g == best and _lex_less(cur, bestc, n)):
            best = g
            bestmsg = msg
            for w in range(W):
                bestc[w] = cur[w]
    for i in range(k):
        best_u[i] = (bestmsg >> i) & 1
    return best


@njit(nogil=True)
def _message(A, zt, eL, k, n, uhat):
    for j in range(k):
        uhat[j] = 0
    for i in range(k):
        if zt[i] ^ eL[i]:
            for j in range(k):
                if getbit(A, i, n + j):
                    uhat[j] ^= 1


@njit(nogil=True)
def decode_frame(gbits, gw, starts, ends, decoder, delta, lmax, order, llr, alpha, uhat):
    """Decode one frame; writes the message estimate, returns (teps, optimal, ok).

    ``ok`` is False only when LC-OSD / OSD meet a rank deficient generator.
    """
    k, n = gbits.shape
    rel = np.abs(llr)
    z = np.zeros(n, np.uint8)
    for j in range(n):
        if llr[j] < 0:
            z[j] = 1
    if decoder == ML:
        ml_search(gw, z, rel, k, n, uhat)
        return 1 << k, True, True
    W = ((n + k) + 63) >> 6
    perm = np.empty(n, np.int64)
    A = np.empty((k, W), np.uint64)
    work = np.empty((k, W), np.uint64)
    if decoder == LC_ROSD:
        rosd_basis(rel, starts, ends, k, n, perm)
        pack_permuted(gbits, perm, k, n, work)
        staircase_reduce_rows(work, k, A)
    else:
        if not mrb_gauss_jordan(gbits, rel, k, n, perm, work, A):
            return 0, False, False
    zt = np.empty(n, np.uint8)
    relt = np.empty(n, np.float64)
    for c in range(n):
        zt[c] = z[perm[c]]
        relt[c] = rel[perm[c]]
    best_eL = np.zeros(k, np.uint8)
    if decoder == OSD:
        _, count = osd_search(A, zt, relt, k, n, order, best_eL)
        _message(A, zt, best_eL, k, n, uhat)
        # only the exhaustive order certifies optimality
        return count, order >= k, True
    p1, rR, base, s0 = extract_parts(A, zt, k, n, delta)
    dummy8 = np.zeros((1, 1), np.uint8)
    dummyf = np.zeros(1, np.float64)
    _, count, optimal = tep_search(
        p1, s0, relt, rR, base, relt[k + delta :], k, delta, lmax, True, alpha,
        False, dummy8, dummy8, dummyf, best_eL,
    )
    _message(A, zt, best_eL, k, n, uhat)
    return count, optimal, True


@njit(nogil=True)
def simulate_frames(gbits, gw, starts, ends, decoder, delta, lmax, order, kind, noise, snr_key,
                    f_start, f_stop, out_err, out_teps, out_opt):
    """Encode/transmit/decode frames f_start..f_stop-1 of one SNR point.

    Frame f uses key derive(snr_key, f); the message comes from sub-stream 0
    and the channel noise from sub-stream 1.  Outputs are indexed by
    f - f_start.
    """
    k, n = gbits.shape
    nst = 1 << delta if decoder <= LC_OSD else 1
    alpha = np.empty((k + 1) * nst, np.float64)
    u = np.empty(k, np.uint8)
    uhat = np.empty(k, np.uint8)
    c = np.empty(n, np.uint8)
    llr = np.empty(n, np.float64)
    for f in range(f_start, f_stop):
        fkey = derive(snr_key, f)
        mkey = derive(fkey, 0)
        nkey = derive(fkey, 1)
        for i in range(k):
            u[i] = stream_bit(mkey, i)
        for j in range(n):
            c[j] = 0
        for i in range(k):
            if u[i]:
                for j in range(n):
                    c[j] ^= gbits[i, j]
        channel_llr(c, kind, noise, nkey, llr)
        teps, optimal, ok = decode_frame(gbits, gw, starts, ends, decoder, delta, lmax, order, llr, alpha, uhat)
        err = 0
        if not ok:
            err = 1
        else:
            for i in range(k):
                if uhat[i] != u[i]:
                    err = 1
                    break
        out_err[f - f_start] = err
        out_teps[f - f_start] = teps
        out_opt[f - f_start] = 1 if optimal else 0
