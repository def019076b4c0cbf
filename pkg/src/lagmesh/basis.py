"""Domains, mesh mapping, Lagrange functions, and kinetic matrices.

The reference meshes live on [-1,1] (Legendre), [0,inf) (Laguerre), and
(-inf,inf) (Hermite).  An affine map carries them onto the physical
domain; its Jacobian h_eff rescales quadrature weights and enters the
Hamiltonian only through the 1/h_eff^2 kinetic prefactor, so the kinetic
matrix itself is always evaluated on reference points.
"""

import enum
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .errors import BadIndex, DegenerateMesh, InvalidScaling, OutOfDomain
from .orthopoly import PolyFamily, _poly_vd
from .precision import to_real


class DomainKind(enum.Enum):
    FINITE = "finite"
    SEMI_INFINITE_RIGHT = "semi-infinite-right"
    SEMI_INFINITE_LEFT = "semi-infinite-left"
    INFINITE = "infinite"


@dataclass(frozen=True)
class Domain:
    """Open interval (lower, upper); None encodes an infinite endpoint.

    Endpoints are kept as the raw user-supplied values (string, int,
    float, or mpfr) and coerced under the solve context, so exact inputs
    like "1/3" survive at any working precision.
    """

    lower: object = None
    upper: object = None

    @classmethod
    def finite(cls, a, b):
        return cls(a, b)

    @classmethod
    def semi_infinite_right(cls, a):
        return cls(a, None)

    @classmethod
    def semi_infinite_left(cls, b):
        return cls(None, b)

    @classmethod
    def infinite(cls):
        return cls(None, None)

    @property
    def kind(self):
        if self.lower is None and self.upper is None:
            return DomainKind.INFINITE
        if self.lower is None:
            return DomainKind.SEMI_INFINITE_LEFT
        if self.upper is None:
            return DomainKind.SEMI_INFINITE_RIGHT
        return DomainKind.FINITE

    def endpoints(self, ctx):
        """(a, b) as mpfr-or-None under ctx; validates a < b when finite."""
        a = None if self.lower is None else to_real(self.lower, ctx)
        b = None if self.upper is None else to_real(self.upper, ctx)
        if a is not None and b is not None and not a < b:
            raise InvalidScaling(f"finite domain needs a < b, got ({a}, {b})")
        return a, b


def choose_family(domain):
    """Finite -> Legendre; semi-infinite -> Laguerre; infinite -> Hermite."""
    kind = domain.kind
    if kind is DomainKind.FINITE:
        return PolyFamily.LEGENDRE
    if kind is DomainKind.INFINITE:
        return PolyFamily.HERMITE
    return PolyFamily.LAGUERRE


@dataclass
class MappedMesh:
    """Reference mesh carried onto the physical domain.

    ``ref_index[k]`` is the reference-mesh index behind physical slot k;
    it differs from k only for reflected (semi-infinite-left) domains,
    where the ascending physical order reverses the mesh.
    """

    reference: object
    domain: Domain
    scaling: mpfr
    jacobian: mpfr
    physical_points: list
    physical_lambda: list
    ref_index: tuple
    _offsets: tuple = field(default=None, repr=False)

    @property
    def dimension(self):
        return self.reference.dimension

    def inverse_map(self, x_phys):
        """Physical coordinate -> reference coordinate (may lie off-mesh)."""
        a, b, reflect = self._offsets
        if reflect:
            return (b - x_phys) / self.jacobian
        return (x_phys - a) / self.jacobian


def map_mesh(record, domain, h=1, ctx=None):
    """Affine map of a reference mesh onto the physical domain.

    Infinite: x = h*u.  Semi-infinite right (a): x = a + h*u.
    Semi-infinite left (b): x = b - h*u, re-sorted ascending.  Finite
    (a,b): x = (b-a)/2*u + (a+b)/2 with the Jacobian fixed by the
    endpoints; a user h != 1 is rejected there.
    """
    ctx = ctx or record.context()
    family = record.key.family
    if family is not choose_family(domain):
        raise InvalidScaling(
            f"domain of kind {domain.kind.value} needs a "
            f"{choose_family(domain).value} mesh, got {family.value}"
        )
    with ctx.activate():
        h = to_real(h, ctx)
        if not h > 0:
            raise InvalidScaling(f"scaling must be positive, got {h}")
        a, b = domain.endpoints(ctx)
        kind = domain.kind
        n = record.dimension
        if kind is DomainKind.FINITE:
            if h != 1:
                raise InvalidScaling(
                    "finite domains fix the Jacobian to (b-a)/2; scaling must stay 1"
                )
            h_eff = (b - a) / 2
            centre = (a + b) / 2
            phys = [h_eff * u + centre for u in record.points]
            index = tuple(range(n))
            offsets = (centre, None, False)
        elif kind is DomainKind.INFINITE:
            h_eff = h
            phys = [h * u for u in record.points]
            index = tuple(range(n))
            offsets = (mpfr(0), None, False)
        elif kind is DomainKind.SEMI_INFINITE_RIGHT:
            h_eff = h
            phys = [a + h * u for u in record.points]
            index = tuple(range(n))
            offsets = (a, None, False)
        else:
            h_eff = h
            phys = [b - h * u for u in reversed(record.points)]
            index = tuple(range(n - 1, -1, -1))
            offsets = (None, b, True)
        lam = [h_eff * record.lagrange_weights[i] for i in index]
        for p, q in zip(phys, phys[1:]):
            if not p < q:
                raise DegenerateMesh("mapped mesh is not strictly ascending")
        _check_inside(phys, a, b)
        return MappedMesh(
            reference=record,
            domain=domain,
            scaling=h,
            jacobian=h_eff,
            physical_points=phys,
            physical_lambda=lam,
            ref_index=index,
            _offsets=offsets,
        )


def _check_inside(phys, a, b):
    if a is not None and not phys[0] > a:
        raise OutOfDomain("mapped point fell on or below the lower endpoint")
    if b is not None and not phys[-1] < b:
        raise OutOfDomain("mapped point fell on or above the upper endpoint")


@dataclass
class KineticMatrix:
    family: PolyFamily
    dimension: int
    entries: list


def kinetic_matrix(family, n, reference_points, ctx):
    """Closed-form matrix of -d^2/du^2 in the Lagrange basis (reference
    coordinates; physical scaling enters via 1/h_eff^2 elsewhere)."""
    if len(reference_points) != n:
        raise ValueError("reference point count does not match dimension")
    with ctx.activate():
        x = [mpfr(p) for p in reference_points]
        for p, q in zip(x, x[1:]):
            if p == q:
                raise DegenerateMesh("duplicate reference points")
        t = [[mpfr(0)] * n for _ in range(n)]
        if family is PolyFamily.LEGENDRE:
            one_m_x2 = [1 - xi * xi for xi in x]
            for i in range(n):
                t[i][i] = (n * (n + 1) * one_m_x2[i] + 4) / (3 * one_m_x2[i] ** 2)
            for i in range(n):
                for j in range(i + 1, n):
                    num = 2 * x[i] * x[j] - 2
                    den = (x[i] - x[j]) ** 2 * gmpy2.sqrt(one_m_x2[i] * one_m_x2[j])
                    val = num / den
                    # (-1)^(i+j+1) in 1-based indexing
                    if (i + j) % 2 == 0:
                        val = -val
                    t[i][j] = t[j][i] = val
        elif family is PolyFamily.LAGUERRE:
            for i in range(n):
                t[i][i] = ((4 * n + 2) * x[i] - x[i] * x[i] + 4) / (12 * x[i] * x[i])
            for i in range(n):
                for j in range(i + 1, n):
                    val = (x[i] + x[j]) / (gmpy2.sqrt(x[i] * x[j]) * (x[i] - x[j]) ** 2)
                    if (i - j) % 2 != 0:
                        val = -val
                    t[i][j] = t[j][i] = val
        elif family is PolyFamily.HERMITE:
            two_n_p1 = 2 * n + 1
            for i in range(n):
                t[i][i] = (two_n_p1 - x[i] * x[i]) / 3
            for i in range(n):
                for j in range(i + 1, n):
                    val = 2 / ((x[i] - x[j]) ** 2)
                    if (i - j) % 2 != 0:
                        val = -val
                    t[i][j] = t[j][i] = val
        else:
            raise ValueError(f"unhandled family {family}")
        return KineticMatrix(family=family, dimension=n, entries=t)


def _sign_prefactor(family, n, i1):
    """Sign fixing f_i(x_i) = +lambda_i^(-1/2); i1 is the 1-based index."""
    if family is PolyFamily.LEGENDRE:
        return -1 if (n + i1) % 2 else 1
    if family is PolyFamily.LAGUERRE:
        return -1 if i1 % 2 else 1
    return -1 if (n - i1) % 2 else 1


def lagrange_eval(record, i, x_ref, ctx=None):
    """Value of the i-th (0-based) Lagrange function at a reference point.

    Within 10^(-P/2) of the supporting node the removable singularity
    P_N(x)/(x - x_i) is evaluated through the derivative limit with a
    first-order Taylor correction from the defining ODE.
    """
    ctx = ctx or record.context()
    n = record.dimension
    if not 0 <= i < n:
        raise BadIndex(f"basis index {i} outside 0..{n - 1}")
    family = record.key.family
    with ctx.activate():
        x = mpfr(x_ref)
        xi = mpfr(record.points[i])
        sign = _sign_prefactor(family, n, i + 1)
        near = mpfr(10) ** -(ctx.digits // 2) * max(abs(xi), mpfr(1))
        dx = x - xi
        if abs(dx) <= near:
            v, d = _poly_vd(family, n, xi)
            dd = _poly_second_derivative(family, n, xi, v, d)
            ratio = d + dx * dd / 2
            x_for_env = x
        else:
            v, _ = _poly_vd(family, n, x)
            ratio = v / dx
            x_for_env = x
        if family is PolyFamily.LEGENDRE:
            env = (x_for_env + 1) * (1 - x_for_env)
            norm = gmpy2.sqrt(2 * (xi + 1) * (1 - xi))
            return sign * env / norm * ratio
        if family is PolyFamily.LAGUERRE:
            return sign * x_for_env / gmpy2.sqrt(xi) * ratio * gmpy2.exp(-x_for_env / 2)
        h_n = mpfr(gmpy2.fac(n)) * (mpfr(2) ** n) * gmpy2.sqrt(gmpy2.const_pi())
        return sign / gmpy2.sqrt(2 * h_n) * ratio * gmpy2.exp(-x_for_env * x_for_env / 2)


def _poly_second_derivative(family, n, x, value, deriv):
    """P_N''(x) from the defining second-order ODE."""
    if family is PolyFamily.LEGENDRE:
        return (2 * x * deriv - n * (n + 1) * value) / (1 - x * x)
    if family is PolyFamily.LAGUERRE:
        return ((x - 1) * deriv - n * value) / x
    return 2 * x * deriv - 2 * n * value


def mapped_lagrange_eval(mesh, i, x_phys, ctx=None):
    """Lagrange function in physical coordinates: h_eff^(-1/2) f(u(x)).

    Index i refers to physical slot order (ascending points); OutOfDomain
    is raised for points on or outside the closure of the domain.
    """
    record = mesh.reference
    ctx = ctx or record.context()
    n = mesh.dimension
    if not 0 <= i < n:
        raise BadIndex(f"basis index {i} outside 0..{n - 1}")
    with ctx.activate():
        x = mpfr(x_phys)
        a, b = mesh.domain.endpoints(ctx)
        if (a is not None and not x > a) or (b is not None and not x < b):
            raise OutOfDomain(f"{x} is not strictly inside the domain")
        u = mesh.inverse_map(x)
        ref_i = mesh.ref_index[i]
        return lagrange_eval(record, ref_i, u, ctx) / gmpy2.sqrt(mesh.jacobian)
