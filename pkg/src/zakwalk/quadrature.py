"""Vectorized adaptive Simpson quadrature.

Intervals are refined breadth-first so that each level costs a single call of
the (array-valued) integrand. Accepted panel contributions are summed with
``math.fsum`` in left-endpoint order, which makes the result independent of
evaluation order.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["adaptive_simpson", "QuadratureResult"]


class QuadratureResult(float):
    """A float carrying ``n_evals`` and ``max_depth_hit`` diagnostics."""

    n_evals: int
    max_depth_hit: bool

    def __new__(cls, value: float, n_evals: int, max_depth_hit: bool):
        obj = super().__new__(cls, value)
        obj.n_evals = n_evals
        obj.max_depth_hit = max_depth_hit
        return obj


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 40,
    initial_panels: int = 16,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``f`` must accept and return 1-D float arrays. A panel with Simpson
    estimates ``S`` (whole) and ``S_l + S_r`` (halves) is accepted when
    ``|S_l + S_r - S| <= 15 * tol_panel``, where each panel's tolerance is
    its share of ``tol`` by width; the Richardson-corrected value
    ``S_l + S_r + (S_l + S_r - S) / 15`` is kept. Panels reaching
    ``max_depth`` are accepted as they are.
    """
    if a == b:
        return QuadratureResult(0.0, 0, False)
    if b < a:
        r = adaptive_simpson(f, b, a, tol, max_depth, initial_panels)
        return QuadratureResult(-float(r), r.n_evals, r.max_depth_hit)

    edges = np.linspace(a, b, 2 * initial_panels + 1)
    fe = np.asarray(f(edges), dtype=float)
    n_evals = edges.size
    lo, mid, hi = edges[0:-1:2], edges[1::2], edges[2::2]
    flo, fmid, fhi = fe[0:-1:2], fe[1::2], fe[2::2]
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    ptol = np.full(lo.shape, tol / initial_panels)

    kept_x: list[np.ndarray] = []
    kept_v: list[np.ndarray] = []
    depth_hit = False
    for depth in range(max_depth + 1):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        fq = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        n_evals += fq.size
        flm, frm = fq[: lm.size], fq[lm.size :]
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * ptol
        if depth == max_depth:
            depth_hit = bool(np.any(~done))
            done[:] = True
        if np.any(done):
            kept_x.append(lo[done])
            kept_v.append((left + right + err / 15.0)[done])
        todo = ~done
        if not np.any(todo):
            break
        lo_t, mid_t, hi_t = lo[todo], mid[todo], hi[todo]
        lo = np.concatenate([lo_t, mid_t])
        hi = np.concatenate([mid_t, hi_t])
        mid = np.concatenate([lm[todo], rm[todo]])
        flo = np.concatenate([flo[todo], fmid[todo]])
        fhi = np.concatenate([fmid[todo], fhi[todo]])
        fmid = np.concatenate([flm[todo], frm[todo]])
        whole = np.concatenate([left[todo], right[todo]])
        half = ptol[todo] / 2.0
        ptol = np.concatenate([half, half])

    xs = np.concatenate(kept_x)
    vs = np.concatenate(kept_v)
    order = np.argsort(xs, kind="stable")
    return QuadratureResult(math.fsum(vs[order].tolist()), n_evals, depth_hit)
