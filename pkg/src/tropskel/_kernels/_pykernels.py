"""Reference implementations of the hot loops (numpy / plain Python)."""
from __future__ import annotations

import numpy as np

_EPS = 1e-13


def _clip(poly: list, labs: list, a0: float, a1: float, b: float, lab: int):
    """Clip a convex polygon by a0*u + a1*v <= b; new boundary edges get label ``lab``."""
    m = len(poly)
    if m == 0:
        return poly, labs
    scale = _EPS * (1.0 + abs(b) + abs(a0) + abs(a1))
    s = [a0 * p[0] + a1 * p[1] - b for p in poly]
    if all(t <= scale for t in s):
        return poly, labs
    out, olab = [], []
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        sp, sq = s[i], s[(i + 1) % m]
        pin, qin = sp <= scale, sq <= scale
        if pin:
            out.append(p)
            olab.append(labs[i])
            if not qin:
                t = sp / (sp - sq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
                olab.append(lab)
        elif qin:
            t = sp / (sp - sq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            olab.append(labs[i])
    return out, olab


def laguerre_polygons_2d(Q: np.ndarray, Y: np.ndarray, h: np.ndarray):
    """Cells {u in Q : <u, y_k> - h_k >= <u, y_j> - h_j for all j} as (vertices, edge labels).

    Edge label -1 means the edge lies on the boundary of Q, otherwise it is the index of the
    neighbouring site.
    """
    N = len(Y)
    base = [(float(q[0]), float(q[1])) for q in Q]
    Y = [(float(y[0]), float(y[1])) for y in Y]
    h = [float(t) for t in h]
    out = []
    for k in range(N):
        poly, labs = list(base), [-1] * len(base)
        yk0, yk1 = Y[k]
        for j in range(N):
            if j == k:
                continue
            poly, labs = _clip(poly, labs, Y[j][0] - yk0, Y[j][1] - yk1, h[j] - h[k], j)
            if not poly:
                break
        out.append((poly, labs))
    return out


def laguerre_2d(Q: np.ndarray, Y: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Areas of the Laguerre cells and lengths of the shared edges (dense N x N)."""
    N = len(Y)
    areas = np.zeros(N)
    lengths = np.zeros((N, N))
    for k, (poly, labs) in enumerate(laguerre_polygons_2d(Q, Y, h)):
        m = len(poly)
        if m < 3:
            continue
        a = 0.0
        for i in range(m):
            p, q = poly[i], poly[(i + 1) % m]
            a += p[0] * q[1] - p[1] * q[0]
            if labs[i] >= 0:
                lengths[k, labs[i]] += ((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2) ** 0.5
        areas[k] = 0.5 * a
    return areas, lengths


def torus_logabs(theta: np.ndarray, E: np.ndarray, coef: np.ndarray, w: np.ndarray, poly: np.ndarray, npoly: int) -> np.ndarray:
    """log|sum_{k in poly a} coef_k w_k exp(i <E_k, theta>)| for every sample and polynomial a."""
    phase = theta @ E.T.astype(float)
    terms = np.exp(1j * phase) * (coef * w)[None, :]
    out = np.empty((theta.shape[0], npoly))
    for a in range(npoly):
        s = terms[:, poly == a].sum(axis=1)
        with np.errstate(divide="ignore"):
            out[:, a] = np.log(np.abs(s))
    return out
