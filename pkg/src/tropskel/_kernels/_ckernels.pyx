# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same signatures as the numpy fallbacks."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, sin, log, hypot
from cython.parallel cimport prange

cnp.import_array()

cdef int _clip(double* px, double* py, int* lab, int m, double a0, double a1, double b, int newlab,
               double* ox, double* oy, int* olab) noexcept nogil:
    cdef double scale = 1e-13 * (1.0 + fabs(b) + fabs(a0) + fabs(a1))
    cdef int i, j, cnt = 0, allin = 1
    cdef double sp, sq, t
    for i in range(m):
        if a0 * px[i] + a1 * py[i] - b > scale:
            allin = 0
            break
    if allin:
        return -1
    for i in range(m):
        j = i + 1
        if j == m:
            j = 0
        sp = a0 * px[i] + a1 * py[i] - b
        sq = a0 * px[j] + a1 * py[j] - b
        if sp <= scale:
            ox[cnt] = px[i]; oy[cnt] = py[i]; olab[cnt] = lab[i]; cnt += 1
            if sq > scale:
                t = sp / (sp - sq)
                ox[cnt] = px[i] + t * (px[j] - px[i]); oy[cnt] = py[i] + t * (py[j] - py[i])
                olab[cnt] = newlab; cnt += 1
        elif sq <= scale:
            t = sp / (sp - sq)
            ox[cnt] = px[i] + t * (px[j] - px[i]); oy[cnt] = py[i] + t * (py[j] - py[i])
            olab[cnt] = lab[i]; cnt += 1
    return cnt


cdef void _cell(int k, int N, int mq, const double[:, ::1] Q, const double[:, ::1] Y, const double[::1] h,
                double* area, double[:, ::1] lengths, double* buf, int* ibuf, int cap) noexcept nogil:
    cdef double* px = buf
    cdef double* py = buf + cap
    cdef double* qx = buf + 2 * cap
    cdef double* qy = buf + 3 * cap
    cdef int* lab = ibuf
    cdef int* qlab = ibuf + cap
    cdef double* tx
    cdef double* ty
    cdef int* tl
    cdef int m = mq, i, j, r
    cdef double a = 0.0
    for i in range(mq):
        px[i] = Q[i, 0]; py[i] = Q[i, 1]; lab[i] = -1
    for j in range(N):
        if j == k:
            continue
        r = _clip(px, py, lab, m, Y[j, 0] - Y[k, 0], Y[j, 1] - Y[k, 1], h[j] - h[k], j, qx, qy, qlab)
        if r == -1:
            continue
        m = r
        tx = px; px = qx; qx = tx
        ty = py; py = qy; qy = ty
        tl = lab; lab = qlab; qlab = tl
        if m == 0:
            break
    if m < 3:
        area[0] = 0.0
        return
    for i in range(m):
        j = i + 1
        if j == m:
            j = 0
        a += px[i] * py[j] - py[i] * px[j]
        if lab[i] >= 0:
            lengths[k, lab[i]] += hypot(px[j] - px[i], py[j] - py[i])
    area[0] = 0.5 * a


def laguerre_2d(Q, Y, h, int threads=1):
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef const double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef int N = Yv.shape[0], mq = Qv.shape[0]
    cdef int cap = mq + N + 4
    areas = np.zeros(N)
    lengths = np.zeros((N, N))
    cdef double[::1] av = areas
    cdef double[:, ::1] lv = lengths
    buf = np.empty((N, 4 * cap))
    ibuf = np.empty((N, 2 * cap), dtype=np.intc)
    cdef double[:, ::1] bv = buf
    cdef int[:, ::1] iv = ibuf
    cdef int k
    for k in prange(N, nogil=True, num_threads=max(threads, 1), schedule="static"):
        _cell(k, N, mq, Qv, Yv, hv, &av[k], lv, &bv[k, 0], &iv[k, 0], cap)
    return areas, lengths


def torus_logabs(theta, E, coef, w, poly, int npoly, int threads=1):
    cdef const double[:, ::1] T = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[:, ::1] Ev = np.ascontiguousarray(E, dtype=np.float64)
    cw = np.asarray(coef, dtype=np.complex128) * np.asarray(w, dtype=np.float64)
    cdef const double[::1] cr = np.ascontiguousarray(cw.real)
    cdef const double[::1] ci = np.ascontiguousarray(cw.imag)
    cdef const long[::1] pv = np.ascontiguousarray(poly, dtype=np.int_)
    cdef int N = T.shape[0], n = T.shape[1], K = Ev.shape[0]
    out = np.empty((N, npoly))
    acc = np.zeros((N, 2 * npoly))
    cdef double[:, ::1] ov = out
    cdef double[:, ::1] av = acc
    cdef int s, k, j, a
    cdef double ph, c, sn, mod
    for s in prange(N, nogil=True, num_threads=max(threads, 1), schedule="static"):
        for k in range(K):
            ph = 0.0
            for j in range(n):
                ph = ph + Ev[k, j] * T[s, j]
            c = cos(ph)
            sn = sin(ph)
            a = pv[k]
            av[s, 2 * a] += cr[k] * c - ci[k] * sn
            av[s, 2 * a + 1] += cr[k] * sn + ci[k] * c
        for a in range(npoly):
            mod = hypot(av[s, 2 * a], av[s, 2 * a + 1])
            if mod > 0:
                ov[s, a] = log(mod)
            else:
                ov[s, a] = -1.0 / 0.0
    return out
