"""Direct brute force over the original dominance-constrained program.

Independent of the four-block builder: it enumerates x, then for every
scenario and threshold picks the y minimising the shortfall.
"""

import itertools
from fractions import Fraction


def _box(lower, upper):
    return itertools.product(*(range(lo, up + 1) for lo, up in zip(lower, upper)))


def sip_brute_force(spec):
    """Optimal value of ``min g x`` subject to the shortfall constraints, or None."""
    T, W = spec.T.to_rows(), spec.W.to_rows()
    L = len(spec.z)
    best = None
    for x in _box(*spec.x_bounds):
        gx = sum(a * b for a, b in zip(spec.g, x))
        if best is not None and gx >= best:
            continue
        cx = sum(a * b for a, b in zip(spec.c, x))
        Tx = [sum(a * b for a, b in zip(row, x)) for row in T]
        # smallest shortfall max(0, c x + q y - a_k) over y with T x + W y = z_l
        ok = True
        for k, ak in enumerate(spec.a):
            total = 0
            for zl in spec.z:
                short = None
                for y in _box(*spec.y_bounds):
                    if all(t + sum(w * v for w, v in zip(row, y)) == zi
                           for t, row, zi in zip(Tx, W, zl)):
                        s = max(0, cx + sum(a * b for a, b in zip(spec.q, y)) - ak)
                        short = s if short is None else min(short, s)
                if short is None:
                    ok = False
                    break
                total += short
            if not ok or Fraction(total, L) > Fraction(spec.abar[k]):
                ok = False
                break
        if ok:
            best = gx
    return best
