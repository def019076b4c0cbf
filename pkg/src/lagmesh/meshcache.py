"""Mesh construction and the on-disk cache.

Layout: ``<cache_root>/<family>/dim_<N>_prec_<P>.points`` and
``....weights``.  The points file holds one decimal number per line
(P+guard significant digits, ascending); the weights file holds two
columns ``w_k lambda_k`` separated by one space.  Line 1 of each file is
the header ``#lagmesh family=<name> n=<N> precision=<P> kind=<...>``.
ASCII, LF line endings.  Writes go to a temp file followed by an atomic
rename, so concurrent builders never expose partial files.

The cache root is taken from the ``LAGMESH_CACHE`` environment variable
and defaults to ``./meshes``.
"""

import os
import re
import tempfile
import warnings
from dataclasses import dataclass

from .errors import CacheCorruption, CacheWarning
from .orthopoly import PolyFamily, mesh_points, mesh_weights
from .precision import MIN_DIGITS, format_scalar, make_context, parse_scalar

ENV_CACHE = "LAGMESH_CACHE"
DEFAULT_CACHE = "meshes"

_FILENAME_RE = re.compile(r"dim_(\d+)_prec_(\d+)\.points$")


@dataclass(frozen=True)
class MeshKey:
    family: PolyFamily
    dimension: int
    precision: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("mesh dimension must be >= 1")
        if self.precision < MIN_DIGITS:
            raise ValueError(f"mesh precision must be >= {MIN_DIGITS}")

    def context(self):
        return make_context(self.precision)


@dataclass
class MeshRecord:
    """Reference mesh: ascending zeros plus Gauss and Lagrange weights."""

    key: MeshKey
    points: list
    gauss_weights: list
    lagrange_weights: list

    @property
    def dimension(self):
        return self.key.dimension

    def context(self):
        return self.key.context()


def resolve_cache_root(cache_root=None):
    if cache_root is not None:
        return str(cache_root)
    return os.environ.get(ENV_CACHE, DEFAULT_CACHE)


def _paths(key, root):
    stem = os.path.join(root, key.family.value, f"dim_{key.dimension}_prec_{key.precision}")
    return stem + ".points", stem + ".weights"


def _header(key, kind):
    return (
        f"#lagmesh family={key.family.value} n={key.dimension} "
        f"precision={key.precision} kind={kind}"
    )


def _atomic_write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_points(key, points, root):
    ctx = key.context()
    lines = [_header(key, "points")]
    lines.extend(format_scalar(x, ctx.working_digits) for x in points)
    path = _paths(key, root)[0]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def _write_weights(key, gauss, lagrange, root):
    ctx = key.context()
    wd = ctx.working_digits
    lines = [_header(key, "weights")]
    lines.extend(
        f"{format_scalar(w, wd)} {format_scalar(lam, wd)}"
        for w, lam in zip(gauss, lagrange)
    )
    path = _paths(key, root)[1]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def _read_lines(path, key, kind):
    try:
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise CacheCorruption(f"{path}: unreadable ({exc})") from exc
    if not lines or lines[0] != _header(key, kind):
        raise CacheCorruption(f"{path}: bad or missing header")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != key.dimension:
        raise CacheCorruption(
            f"{path}: expected {key.dimension} records, found {len(body)}"
        )
    return body


def _parse_real(token, ctx, path):
    try:
        z = parse_scalar(token, ctx)
    except Exception as exc:
        raise CacheCorruption(f"{path}: bad number {token!r}") from exc
    if z.imag != 0:
        raise CacheCorruption(f"{path}: bad number {token!r}")
    return z.real


def load_points(key, cache_root=None):
    """Read the cached points file; raises CacheCorruption on damage."""
    root = resolve_cache_root(cache_root)
    path = _paths(key, root)[0]
    ctx = key.context()
    body = _read_lines(path, key, "points")
    with ctx.activate():
        pts = [_parse_real(ln.strip(), ctx, path) for ln in body]
    for a, b in zip(pts, pts[1:]):
        if not a < b:
            raise CacheCorruption(f"{path}: points not strictly ascending")
    return pts


def load_weights(key, cache_root=None):
    root = resolve_cache_root(cache_root)
    path = _paths(key, root)[1]
    ctx = key.context()
    body = _read_lines(path, key, "weights")
    gauss, lagrange = [], []
    with ctx.activate():
        for ln in body:
            cols = ln.split(" ")
            if len(cols) != 2:
                raise CacheCorruption(f"{path}: expected two columns, got {ln!r}")
            gauss.append(_parse_real(cols[0], ctx, path))
            lagrange.append(_parse_real(cols[1], ctx, path))
    return gauss, lagrange


def mesh_exists(key, cache_root=None, with_weights=False):
    root = resolve_cache_root(cache_root)
    points_path, weights_path = _paths(key, root)
    if not os.path.isfile(points_path):
        return False
    if with_weights and not os.path.isfile(weights_path):
        return False
    return True


def list_meshes(cache_root=None, family=None, dimension=None, precision=None):
    """All cached (family, N, P) keys matching the given filters, sorted."""
    root = resolve_cache_root(cache_root)
    found = []
    families = [family] if family is not None else list(PolyFamily)
    for fam in families:
        famdir = os.path.join(root, fam.value)
        if not os.path.isdir(famdir):
            continue
        for name in os.listdir(famdir):
            m = _FILENAME_RE.match(name)
            if not m:
                continue
            n, p = int(m.group(1)), int(m.group(2))
            if dimension is not None and n != dimension:
                continue
            if precision is not None and p != precision:
                continue
            found.append(MeshKey(fam, n, p))
    found.sort(key=lambda k: (k.family.value, k.dimension, k.precision))
    return found


def available_mesh(family=None, dimension=None, precision=None, cache_root=None):
    """Existence query: bool when fully keyed, otherwise a key listing."""
    if family is not None and dimension is not None and precision is not None:
        return mesh_exists(MeshKey(family, dimension, precision), cache_root)
    return list_meshes(cache_root, family=family, dimension=dimension, precision=precision)


def build_mesh(key, cache_root=None, want_weights=True):
    """Load the mesh from cache or compute and persist it.

    Corrupt cache files are recomputed and overwritten after a
    CacheWarning.  The returned record always went through the decimal
    serialization, so cached and freshly built meshes are digit-for-digit
    identical.
    """
    root = resolve_cache_root(cache_root)
    ctx = key.context()
    points = None
    if mesh_exists(key, root):
        try:
            points = load_points(key, root)
        except CacheCorruption as exc:
            warnings.warn(f"recomputing corrupt mesh cache: {exc}", CacheWarning)
            points = None
    if points is None:
        computed = mesh_points(key.family, key.dimension, ctx)
        _write_points(key, computed, root)
        points = load_points(key, root)
    if not want_weights:
        return MeshRecord(key, points, [], [])
    gauss = lagrange = None
    if mesh_exists(key, root, with_weights=True):
        try:
            gauss, lagrange = load_weights(key, root)
        except CacheCorruption as exc:
            warnings.warn(f"recomputing corrupt mesh cache: {exc}", CacheWarning)
            gauss = lagrange = None
    if gauss is None:
        w, lam = mesh_weights(key.family, key.dimension, points, ctx)
        _write_weights(key, w, lam, root)
        gauss, lagrange = load_weights(key, root)
    return MeshRecord(key, points, gauss, lagrange)
