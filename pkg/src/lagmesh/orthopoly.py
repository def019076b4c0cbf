"""Classical orthogonal polynomials: evaluation, zeros, quadrature weights.

Mesh points are the N zeros of the degree-N Legendre, Laguerre, or
Hermite polynomial.  Roots are located in two stages: hardware-precision
bisection on interlacing brackets (vectorized with numpy, globally
convergent), then per-root Newton polishing in big-float arithmetic with
a digit-doubling precision schedule.  Weights use the classical closed
forms, which are numerically benign with big floats.
"""

import enum
import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .errors import RootRefinementFailure, WeightComputationFailure


class PolyFamily(enum.Enum):
    LEGENDRE = "legendre"
    LAGUERRE = "laguerre"
    HERMITE = "hermite"

    @classmethod
    def parse(cls, name):
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown polynomial family {name!r}; "
                f"expected one of {[f.value for f in cls]}"
            ) from None


def _poly_vd(family, n, x):
    """(P_n(x), P_n'(x)) by upward three-term recurrence, gmpy2 arithmetic.

    Assumes a gmpy2 context is active.  Derivatives come from the standard
    identities; endpoints where they degenerate (|x|=1 Legendre, x=0
    Laguerre) fall back to the closed-form limits.
    """
    if n == 0:
        return mpfr(1), mpfr(0)
    if family is PolyFamily.LEGENDRE:
        p_prev, p = mpfr(1), x
        for k in range(1, n):
            p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        omx2 = 1 - x * x
        if omx2 == 0:
            d = mpfr(n * (n + 1)) / 2
            if x < 0 and n % 2 == 0:
                d = -d
            return p, d
        return p, n * (p_prev - x * p) / omx2
    if family is PolyFamily.LAGUERRE:
        p_prev, p = mpfr(1), 1 - x
        for k in range(1, n):
            p_prev, p = p, ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        if x == 0:
            return p, mpfr(-n)
        return p, n * (p - p_prev) / x
    if family is PolyFamily.HERMITE:
        p_prev, p = mpfr(1), 2 * x
        for k in range(1, n):
            p_prev, p = p, 2 * x * p - 2 * k * p_prev
        return p, 2 * n * p_prev
    raise ValueError(f"unhandled family {family}")


def poly_eval(family, n, x, ctx):
    """Public wrapper: evaluate (value, derivative) under ctx's precision."""
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    with ctx.activate():
        return _poly_vd(family, n, mpfr(x))


# ---------------------------------------------------------------------------
# stage 1: float64 root location by interlacing bisection


def _first_root(family):
    return 1.0 if family is PolyFamily.LAGUERRE else 0.0


def _outer_bounds(family, k):
    if family is PolyFamily.LEGENDRE:
        return -1.0, 1.0
    if family is PolyFamily.LAGUERRE:
        return 0.0, 4.0 * k + 4.0
    bound = math.sqrt(2.0 * k + 1.0) + 1.0
    return -bound, bound


def _eval_scaled(family, n, x):
    """Sign-faithful degree-n values at float64 points x, rescaled to avoid
    overflow/underflow (only the sign is meaningful)."""
    p_prev = np.ones_like(x)
    if family is PolyFamily.LEGENDRE:
        p = x.copy()
    elif family is PolyFamily.LAGUERRE:
        p = 1.0 - x
    else:
        p = 2.0 * x
    for k in range(1, n):
        if family is PolyFamily.LEGENDRE:
            p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        elif family is PolyFamily.LAGUERRE:
            p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        else:
            p_next = 2.0 * x * p - 2.0 * k * p_prev
        p_prev, p = p, p_next
        mag = np.abs(p)
        big = mag > 1e280
        if big.any():
            scale = np.where(big, 1e-280, 1.0)
            p = p * scale
            p_prev = p_prev * scale
        small = (mag < 1e-250) & (np.abs(p_prev) < 1e-250) & (mag > 0)
        if small.any():
            scale = np.where(small, 1e250, 1.0)
            p = p * scale
            p_prev = p_prev * scale
    return p


def _float_roots(family, n):
    """All n zeros in float64.  Degree-by-degree ascension: the zeros of
    degree k-1 plus the interval endpoints bracket the zeros of degree k."""
    roots = np.array([_first_root(family)])
    for k in range(2, n + 1):
        lo, hi = _outer_bounds(family, k)
        left = np.concatenate(([lo], roots))
        right = np.concatenate((roots, [hi]))
        f_left = _eval_scaled(family, k, left)
        for _ in range(60):
            mid = 0.5 * (left + right)
            f_mid = _eval_scaled(family, k, mid)
            same = np.signbit(f_mid) == np.signbit(f_left)
            left = np.where(same, mid, left)
            f_left = np.where(same, f_mid, f_left)
            right = np.where(same, right, mid)
        roots = 0.5 * (left + right)
    return roots


# ---------------------------------------------------------------------------
# stage 2: Newton polishing at increasing precision


def _polish_root(family, n, x0, ctx):
    """Newton-polish one root, doubling working bits per sweep."""
    target_bits = ctx.bits
    schedule = [80]
    while schedule[-1] < target_bits:
        schedule.append(min(schedule[-1] * 2, target_bits))
    x = mpfr(float(x0), 80)
    for bits in schedule[:-1]:
        with gmpy2.context(precision=bits + 10):
            x = +x
            for _ in range(2):
                v, d = _poly_vd(family, n, x)
                x = x - v / d
    with ctx.activate():
        x = +x
        step_tol = ctx.eps(3)
        for _ in range(48):
            v, d = _poly_vd(family, n, x)
            dx = v / d
            x = x - dx
            if abs(dx) <= step_tol * max(abs(x), mpfr(1)):
                return x
        raise RootRefinementFailure(
            f"Newton did not converge for {family.value} degree {n} near {float(x0)}"
        )


def mesh_points(family, n, ctx):
    """The n real zeros of the degree-n family polynomial, ascending.

    Legendre and Hermite meshes are antisymmetric; the negative half is
    mirrored from the polished positive half so x_k = -x_{N+1-k} holds
    exactly.
    """
    if n < 1:
        raise ValueError("mesh dimension must be >= 1")
    approx = _float_roots(family, n)
    with ctx.activate():
        if family is PolyFamily.LAGUERRE:
            points = [_polish_root(family, n, r, ctx) for r in approx]
        else:
            half = [_polish_root(family, n, r, ctx) for r in approx[(n + 1) // 2:]]
            points = [-p for p in reversed(half)]
            if n % 2 == 1:
                points.append(mpfr(0))
            points.extend(half)
        for a, b in zip(points, points[1:]):
            if not a < b:
                raise RootRefinementFailure(
                    f"{family.value} degree {n}: zeros not strictly ascending"
                )
        return points


def mesh_weights(family, n, points, ctx):
    """Gauss weights w_k and Lagrange weights lambda_k = w_k / w(x_k).

    Closed forms: Legendre  w_k = 2 / [(1-x_k^2) P_N'(x_k)^2],
    Laguerre  w_k = x_k / [(N+1)^2 L_{N+1}(x_k)^2],
    Hermite   w_k = 2^(N-1) N! sqrt(pi) / [N^2 H_{N-1}(x_k)^2].
    """
    if len(points) != n:
        raise ValueError("points list does not match dimension")
    with ctx.activate():
        gauss = []
        lagrange = []
        if family is PolyFamily.HERMITE:
            coeff = mpfr(gmpy2.fac(n)) * (mpfr(2) ** (n - 1)) * gmpy2.sqrt(gmpy2.const_pi())
        for x in points:
            x = mpfr(x)
            if family is PolyFamily.LEGENDRE:
                _, d = _poly_vd(family, n, x)
                w = 2 / ((1 - x * x) * d * d)
                lam = w
            elif family is PolyFamily.LAGUERRE:
                v_next, _ = _poly_vd(family, n + 1, x)
                w = x / ((n + 1) ** 2 * v_next * v_next)
                lam = w * gmpy2.exp(x)
            else:
                v_prev, _ = _poly_vd(family, n - 1, x)
                w = coeff / (n * n * v_prev * v_prev)
                lam = w * gmpy2.exp(x * x)
            if not (gmpy2.is_finite(w) and w > 0 and gmpy2.is_finite(lam) and lam > 0):
                raise WeightComputationFailure(
                    f"non-positive weight for {family.value} N={n} at x={float(x)}"
                )
            gauss.append(w)
            lagrange.append(lam)
        return gauss, lagrange
