# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled merge cascade for the built-in evaluation functions.

Mirrors ``_pykernels.cascade`` exactly: same pair admission order, same
per-bin iteration, same accumulation order, so results (including the
floating-point scores) are identical to the pure-Python path.  The
statistical finish (chi-squared and friends) stays in Python; this
kernel returns the running aggregates.
"""

from libc.math cimport fabs, log, sqrt
from libcpp.vector cimport vector

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF K_ALERGIA = 0
DEF K_LR = 1
DEF K_AIC = 2
DEF K_MDI = 3

DEF LOG_REP = 0
DEF LOG_COUNTS = 1
DEF LOG_ATTACH = 2

DEF NO_NODE = -1
DEF WHITE = 0
DEF RED = 1

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.int8_t i8


cdef struct Frame:
    long x
    long y
    long a
    long depth


cdef inline long cfind(i32[:] rep, long n) noexcept:
    while rep[n] != NO_NODE:
        n = rep[n]
    return n


cdef bint markov_ok(i32[:] depth_arr, i32[:] parent, i32[:] incoming,
                    long x, long y, long order) noexcept:
    cdef long k = order
    if depth_arr[x] < k:
        k = depth_arr[x]
    if depth_arr[y] < k:
        k = depth_arr[y]
    cdef long i
    for i in range(k):
        if incoming[x] != incoming[y]:
            return False
        x = parent[x]
        y = parent[y]
    return True


cdef bint alergia_pair(i64[:, :] scounts, i64[:] finals, i64[:] paths,
                       long x, long y, long n_symbols, double alpha,
                       long state_count, long symbol_count, double correction,
                       bint finalprob, double* margin_acc) noexcept:
    """Hoeffding checks over survivor/pool/final bins; margin accumulated."""
    cdef long total_q = paths[x]
    cdef long total_p = paths[y]
    if total_q < state_count or total_p < state_count:
        return True
    if total_q == 0 or total_p == 0:
        return True

    cdef long p1q = 0, p1p = 0, p2q = 0, p2p = 0
    cdef long n_bins = 0
    cdef long a, cq, cp
    cdef bint infreq_q, infreq_p
    for a in range(n_symbols):
        cq = scounts[x, a]
        cp = scounts[y, a]
        infreq_p = cp < symbol_count
        infreq_q = cq < symbol_count
        if infreq_p:
            p1q += cq
            p1p += cp
        if infreq_q:
            p2q += cq
            p2p += cp
        if (not infreq_q) and (not infreq_p) and (cq > 0 or cp > 0):
            n_bins += 1
    if p1q > 0 or p1p > 0:
        n_bins += 1
    if p2q > 0 or p2p > 0:
        n_bins += 1
    if finalprob:
        n_bins += 1

    cdef double denom_q = total_q + correction * n_bins
    cdef double denom_p = total_p + correction * n_bins
    cdef double bound = sqrt(0.5 * log(2.0 / alpha)) * (
        1.0 / sqrt(<double>total_q) + 1.0 / sqrt(<double>total_p))

    cdef double margin = 0.0
    cdef double diff
    for a in range(n_symbols):
        cq = scounts[x, a]
        cp = scounts[y, a]
        if cq >= symbol_count and cp >= symbol_count and (cq > 0 or cp > 0):
            diff = fabs((cq + correction) / denom_q - (cp + correction) / denom_p)
            if diff >= bound:
                return False
            margin += bound - diff
    if p1q > 0 or p1p > 0:
        diff = fabs((p1q + correction) / denom_q - (p1p + correction) / denom_p)
        if diff >= bound:
            return False
        margin += bound - diff
    if p2q > 0 or p2p > 0:
        diff = fabs((p2q + correction) / denom_q - (p2p + correction) / denom_p)
        if diff >= bound:
            return False
        margin += bound - diff
    if finalprob:
        diff = fabs((finals[x] + correction) / denom_q - (finals[y] + correction) / denom_p)
        if diff >= bound:
            return False
        margin += bound - diff
    margin_acc[0] += margin
    return True


cdef void ll_pair(i64[:, :] scounts, i64[:] finals, i64[:] paths,
                  long x, long y, long n_symbols, bint finalprob,
                  long state_count, double* dll_acc, long* dpar_acc) noexcept:
    """Likelihood decrease and removed parameters of folding y into x."""
    cdef long total_q = paths[x]
    cdef long total_p = paths[y]
    if total_q < state_count or total_p < state_count:
        return
    cdef long total_m = total_q + total_p
    cdef double dll = 0.0
    cdef long dparams = 0
    cdef long a, cx, cy
    for a in range(n_symbols):
        cx = scounts[x, a]
        cy = scounts[y, a]
        if cx == 0 and cy == 0:
            continue
        if cx > 0:
            dll += cx * log((<double>cx) / total_q)
        if cy > 0:
            dll += cy * log((<double>cy) / total_p)
        dll -= (cx + cy) * log((<double>(cx + cy)) / total_m)
        if cx > 0 and cy > 0:
            dparams += 1
    cdef long fx = finals[x]
    cdef long fy = finals[y]
    if finalprob:
        if fx > 0:
            dll += fx * log((<double>fx) / total_q)
        if fy > 0:
            dll += fy * log((<double>fy) / total_p)
        if fx + fy > 0:
            dll -= (fx + fy) * log((<double>(fx + fy)) / total_m)
        if fx > 0 and fy > 0:
            dparams += 1
    dll_acc[0] += dll
    dpar_acc[0] += dparams


cdef double mdi_pair(i64[:, :] scounts, i64[:] finals, i64[:] paths,
                     cnp.float64_t[:, :] weights, long x, long y,
                     long n_symbols, bint finalprob, long state_count) noexcept:
    """Reference-mass-weighted log-probability change of folding y into x."""
    cdef long total_q = paths[x]
    cdef long total_p = paths[y]
    if total_q < state_count or total_p < state_count:
        return 0.0
    cdef long total_m = total_q + total_p
    cdef double out = 0.0
    cdef double wx, wy
    cdef long a, cx, cy
    for a in range(n_symbols):
        cx = scounts[x, a]
        cy = scounts[y, a]
        if cx == 0 and cy == 0:
            continue
        wx = weights[x, a]
        wy = weights[y, a]
        if cx > 0 and wx != 0.0:
            out += wx * log((<double>cx) / total_q)
        if cy > 0 and wy != 0.0:
            out += wy * log((<double>cy) / total_p)
        if wx + wy != 0.0:
            out -= (wx + wy) * log((<double>(cx + cy)) / total_m)
    cdef long fx = finals[x]
    cdef long fy = finals[y]
    if finalprob:
        wx = weights[x, n_symbols]
        wy = weights[y, n_symbols]
        if fx > 0 and wx != 0.0:
            out += wx * log((<double>fx) / total_q)
        if fy > 0 and wy != 0.0:
            out += wy * log((<double>fy) / total_p)
        if fx + fy > 0 and wx + wy != 0.0:
            out -= (wx + wy) * log((<double>(fx + fy)) / total_m)
    return out


def cascade(rep_obj, color_obj, children_obj, scounts_obj, finals_obj, paths_obj,
            weights_obj, depth_obj, parent_obj, incoming_obj,
            long q, long qp,
            double alpha, long state_count, long symbol_count, double correction,
            bint finalprob, long markovian, long ktail, bint redfixed,
            int kernel_id, bint collect_log, bint track_aic):
    """Merge qp into q with determinization; see the Python reference.

    Returns (structural_ok, agg0, agg1, dll, dparams, log_tuple).  The
    state is left applied only when structural_ok and collect_log;
    otherwise every write has been rolled back before returning.
    """
    cdef i32[:] rep = rep_obj
    cdef i8[:] color = color_obj
    cdef i32[:, :] children = children_obj
    cdef i64[:, :] scounts = scounts_obj
    cdef i64[:] finals = finals_obj
    cdef i64[:] paths = paths_obj
    cdef i32[:] depth_arr = depth_obj
    cdef i32[:] parent = parent_obj
    cdef i32[:] incoming = incoming_obj
    cdef bint has_w = weights_obj is not None
    cdef cnp.float64_t[:, :] weights
    if has_w:
        weights = weights_obj
    elif kernel_id == K_MDI:
        raise ValueError("the mdi evaluation needs prefix weights allocated")

    cdef long n_symbols = children.shape[1]
    cdef long wrow = n_symbols + 1  # weight rows carry a final column

    cdef vector[signed char] kind
    cdef vector[long long] e0, e1, e2
    cdef vector[double] wbackup

    cdef vector[Frame] stack
    cdef Frame frame

    cdef double agg0 = 0.0       # margin (alergia) / dll (lr, aic) / numerator (mdi)
    cdef long agg1 = 0           # dparams for lr / aic / mdi
    cdef double dll_track = 0.0
    cdef long dpar_track = 0
    cdef double d_acc
    cdef long p_acc

    cdef bint ok = True
    cdef bint pending = True
    cdef long px = q, py = qp, pdepth = 0
    cdef long x, y, a, d, j, cy_node, cx_node, tx, ty, widx

    while True:
        if pending:
            pending = False
            x = px
            y = py
            d = pdepth
            # ---- admission: constraints, evaluation, then apply ----
            if markovian > 0 and not markov_ok(depth_arr, parent, incoming,
                                               x, y, markovian):
                ok = False
                break
            if ktail == 0 or d < ktail:
                if kernel_id == K_ALERGIA:
                    if not alergia_pair(scounts, finals, paths, x, y, n_symbols,
                                        alpha, state_count, symbol_count,
                                        correction, finalprob, &agg0):
                        ok = False
                        break
                elif kernel_id == K_MDI:
                    agg0 += mdi_pair(scounts, finals, paths, weights, x, y,
                                     n_symbols, finalprob, state_count)
                    d_acc = 0.0
                    p_acc = 0
                    ll_pair(scounts, finals, paths, x, y, n_symbols, finalprob,
                            state_count, &d_acc, &p_acc)
                    agg1 += p_acc
                else:  # likelihood-ratio and AIC share the aggregates
                    d_acc = 0.0
                    p_acc = 0
                    ll_pair(scounts, finals, paths, x, y, n_symbols, finalprob,
                            state_count, &d_acc, &p_acc)
                    agg0 += d_acc
                    agg1 += p_acc
            if track_aic:
                d_acc = 0.0
                p_acc = 0
                ll_pair(scounts, finals, paths, x, y, n_symbols, finalprob,
                        state_count, &d_acc, &p_acc)
                dll_track += d_acc
                dpar_track += p_acc
            # representative pointer + color
            kind.push_back(LOG_REP)
            e0.push_back(y)
            e1.push_back(x)
            e2.push_back(color[y])
            rep[y] = <i32>x
            color[y] = WHITE
            # counts (and the auxiliary weight row, backed up exactly)
            widx = -1
            if has_w:
                widx = <long>(wbackup.size() // wrow)
                for j in range(wrow):
                    wbackup.push_back(weights[x, j])
                    weights[x, j] += weights[y, j]
            kind.push_back(LOG_COUNTS)
            e0.push_back(x)
            e1.push_back(y)
            e2.push_back(widx)
            for j in range(n_symbols):
                scounts[x, j] += scounts[y, j]
            finals[x] += finals[y]
            paths[x] += paths[y]
            frame.x = x
            frame.y = y
            frame.a = 0
            frame.depth = d
            stack.push_back(frame)
            continue

        if stack.empty():
            break
        frame = stack.back()
        stack.pop_back()
        x = frame.x
        y = frame.y
        a = frame.a
        d = frame.depth
        while a < n_symbols:
            cy_node = children[y, a]
            if cy_node == NO_NODE:
                a += 1
                continue
            ty = cfind(rep, cy_node)
            cx_node = children[x, a]
            if cx_node == NO_NODE:
                if redfixed and color[x] == RED:
                    ok = False
                    break
                kind.push_back(LOG_ATTACH)
                e0.push_back(x)
                e1.push_back(a)
                e2.push_back(ty)
                children[x, a] = <i32>ty
                a += 1
                continue
            tx = cfind(rep, cx_node)
            if tx == ty:
                a += 1
                continue
            frame.x = x
            frame.y = y
            frame.a = a + 1
            frame.depth = d
            stack.push_back(frame)
            px = tx
            py = ty
            pdepth = d + 1
            pending = True
            break
        if not ok:
            break

    cdef long n_log = <long>kind.size()
    cdef long i, k
    if ok and collect_log:
        kind_np = np.empty(n_log, dtype=np.int8)
        e0_np = np.empty(n_log, dtype=np.int64)
        e1_np = np.empty(n_log, dtype=np.int64)
        e2_np = np.empty(n_log, dtype=np.int64)
        cdef_fill(kind, e0, e1, e2, kind_np, e0_np, e1_np, e2_np)
        if has_w and wbackup.size() > 0:
            wrows_np = np.empty((<long>(wbackup.size() // wrow), wrow),
                                dtype=np.float64)
            _fill_wrows(wbackup, wrows_np)
        else:
            wrows_np = None
        return True, agg0, agg1, dll_track, dpar_track, \
            (kind_np, e0_np, e1_np, e2_np, wrows_np)

    # roll back newest-first
    for i in range(n_log - 1, -1, -1):
        k = kind[i]
        if k == LOG_ATTACH:
            children[e0[i], e1[i]] = NO_NODE
        elif k == LOG_COUNTS:
            x = e0[i]
            y = e1[i]
            for j in range(n_symbols):
                scounts[x, j] -= scounts[y, j]
            finals[x] -= finals[y]
            paths[x] -= paths[y]
            widx = e2[i]
            if widx >= 0:
                for j in range(wrow):
                    weights[x, j] = wbackup[widx * wrow + j]
        else:
            rep[e0[i]] = NO_NODE
            color[e0[i]] = <i8>e2[i]
    return ok, agg0, agg1, dll_track, dpar_track, None


cdef void cdef_fill(vector[signed char]& kind, vector[long long]& e0,
                    vector[long long]& e1, vector[long long]& e2,
                    i8[:] kind_np, i64[:] e0_np, i64[:] e1_np,
                    i64[:] e2_np) noexcept:
    cdef long i
    for i in range(<long>kind.size()):
        kind_np[i] = kind[i]
        e0_np[i] = e0[i]
        e1_np[i] = e1[i]
        e2_np[i] = e2[i]


cdef void _fill_wrows(vector[double]& wbackup, cnp.float64_t[:, :] out) noexcept:
    cdef long i, j, w = out.shape[1]
    for i in range(out.shape[0]):
        for j in range(w):
            out[i, j] = wbackup[i * w + j]
