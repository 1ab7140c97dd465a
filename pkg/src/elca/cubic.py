"""Vectorised real roots of monic cubics ``x^3 + b x^2 + c x + d``."""

from __future__ import annotations

import numpy as np


def cubic_eval(x, b, c, d):
    return ((x + b) * x + c) * x + d


def _newton_polish(x, b, c, d, steps=3):
    for _ in range(steps):
        f = cubic_eval(x, b, c, d)
        df = (3.0 * x + 2.0 * b) * x + c
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        nxt = x - step
        better = np.isfinite(nxt) & (np.abs(cubic_eval(nxt, b, c, d)) < np.abs(f))
        x = np.where(better, nxt, x)
    return x


def real_cubic_roots(b, c, d, polish: bool = True) -> np.ndarray:
    """Real roots of ``x^3 + b x^2 + c x + d``, shape ``(..., 3)``, nan-padded.

    Three real roots use the trigonometric form, a single real root uses
    Cardano's formula arranged to avoid cancellation. A few Newton steps on
    the original polynomial clean up rounding from the depressed form.
    """
    b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (b, c, d)))
    shift = b / 3.0
    p = c - b * shift
    q = (2.0 * b * b * b) / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    out = np.full(b.shape + (3,), np.nan)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        three = disc < 0
        if three.any():
            pt, qt, st = p[three], q[three], shift[three]
            r = 2.0 * np.sqrt(-pt / 3.0)
            arg = np.clip(3.0 * qt / (2.0 * pt) * np.sqrt(-3.0 / pt), -1.0, 1.0)
            theta = np.arccos(arg) / 3.0
            for i in range(3):
                out[three, i] = r * np.cos(theta - 2.0 * np.pi * i / 3.0) - st

        one = ~three & np.isfinite(disc)
        if one.any():
            po, qo, so = p[one], q[one], shift[one]
            s = np.sqrt(disc[one])
            w = np.cbrt(-qo / 2.0 - np.copysign(s, qo))
            other = np.where(w != 0, -po / (3.0 * np.where(w != 0, w, 1.0)), 0.0)
            t = w + other
            out[one, 0] = t - so
            # repeated root when the discriminant vanishes
            out[one, 1] = np.where(disc[one] == 0, -t / 2.0 - so, np.nan)

    if polish:
        bb, cc, dd = (v[..., None] for v in (b, c, d))
        finite = np.isfinite(out)
        out = np.where(finite, _newton_polish(np.where(finite, out, 0.0), bb, cc, dd), np.nan)
    return out
