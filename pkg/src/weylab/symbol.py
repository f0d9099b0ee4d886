"""Matrix symbols on T*S^1: evaluation, root classification, region mapping.

A symbol is a matrix-valued polynomial in the fiber variable xi whose
coefficients are trigonometric polynomials in x.  The scalarization
``q_z = det(p - z)`` organizes everything: its zeros in phase space are
classified by the sign of the real bracket ``(1/2i){q_z, conj(q_z)}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import NonConvergence, ZeroOnContour

TWO_PI = 2.0 * math.pi

# x-grid density used for construction-time sup/inf estimates of coefficients
_COEFF_GRID = 512


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite trigonometric polynomial sum_j c_j e^{ijx}, |j| <= J."""

    coefficients: Mapping[int, complex]

    def __post_init__(self):
        clean = {int(j): complex(c) for j, c in self.coefficients.items()
                 if c != 0}
        object.__setattr__(self, "coefficients", clean)

    @property
    def bandwidth(self) -> int:
        if not self.coefficients:
            return 0
        return max(abs(j) for j in self.coefficients)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for j, c in self.coefficients.items():
            out += c * np.exp(1j * j * x)
        return out if out.shape else complex(out)

    def derivative(self) -> "TrigPolynomial":
        """d/dx, exact on Fourier data."""
        return TrigPolynomial({j: 1j * j * c for j, c in self.coefficients.items()})

    def dx_op(self) -> "TrigPolynomial":
        """D_x = (1/i) d/dx applied to this function."""
        return TrigPolynomial({j: j * c for j, c in self.coefficients.items()})

    def conjugate(self) -> "TrigPolynomial":
        return TrigPolynomial({-j: np.conj(c) for j, c in self.coefficients.items()})

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        merged = dict(self.coefficients)
        for j, c in other.coefficients.items():
            merged[j] = merged.get(j, 0.0) + c
        return TrigPolynomial(merged)

    def scale(self, factor: complex) -> "TrigPolynomial":
        return TrigPolynomial({j: factor * c for j, c in self.coefficients.items()})

    def is_zero(self) -> bool:
        return not self.coefficients


ZERO_TRIG = TrigPolynomial({})


def _as_trig(value) -> TrigPolynomial:
    if isinstance(value, TrigPolynomial):
        return value
    if isinstance(value, Mapping):
        return TrigPolynomial(value)
    return TrigPolynomial({0: complex(value)})


@dataclass(frozen=True)
class MatrixSymbol:
    """p(x, xi) = sum_{alpha=0..m} A_alpha(x) xi^alpha with n x n coefficients.

    ``coeffs[alpha][i][j]`` is the TrigPolynomial entry A_alpha^{i,j}.
    Ellipticity (min_x sigma_min(A_m(x)) > 0) is verified at construction.
    """

    n: int
    m: int
    coeffs: tuple
    semiclassical: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.coeffs) != self.m + 1:
            raise ValueError("coeffs must have exactly m+1 entries")
        norm = tuple(
            tuple(tuple(_as_trig(self.coeffs[a][i][j]) for j in range(self.n))
                  for i in range(self.n))
            for a in range(self.m + 1)
        )
        object.__setattr__(self, "coeffs", norm)
        if self.ellipticity_margin() <= 0.0:
            raise ValueError("leading coefficient is not elliptic: "
                             "min_x sigma_min(A_m(x)) <= 0")

    # -- coefficient evaluation -------------------------------------------

    def coeff_values(self, alpha: int, x) -> np.ndarray:
        """A_alpha evaluated on an array of x; shape (..., n, n)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape + (self.n, self.n), dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                out[..., i, j] = self.coeffs[alpha][i][j](x)
        return out

    def ellipticity_margin(self, grid: int = _COEFF_GRID) -> float:
        x = np.linspace(0.0, TWO_PI, grid, endpoint=False)
        a_m = self.coeff_values(self.m, x)
        return float(np.linalg.svd(a_m, compute_uv=False)[..., -1].min())

    def coeff_sup_norm(self, alpha: int, grid: int = _COEFF_GRID) -> float:
        x = np.linspace(0.0, TWO_PI, grid, endpoint=False)
        a = self.coeff_values(alpha, x)
        return float(np.linalg.svd(a, compute_uv=False)[..., 0].max())

    def max_bandwidth(self) -> int:
        return max((self.coeffs[a][i][j].bandwidth
                    for a in range(self.m + 1)
                    for i in range(self.n) for j in range(self.n)), default=0)

    def lower_order_present(self) -> list:
        """Orders alpha < m with a nonzero coefficient matrix."""
        out = []
        for a in range(self.m):
            if any(not self.coeffs[a][i][j].is_zero()
                   for i in range(self.n) for j in range(self.n)):
                out.append(a)
        return out

    def adjoint_principal(self) -> "MatrixSymbol":
        """Pointwise conjugate-transpose symbol p*(x, xi)."""
        coeffs = tuple(
            tuple(tuple(self.coeffs[a][j][i].conjugate() for j in range(self.n))
                  for i in range(self.n))
            for a in range(self.m + 1)
        )
        return MatrixSymbol(self.n, self.m, coeffs, self.semiclassical)


def scalar_symbol(m: int, coeff_maps: Mapping[int, Mapping[int, complex]],
                  semiclassical: bool = True) -> MatrixSymbol:
    """Convenience constructor for n = 1 symbols.

    ``coeff_maps[alpha]`` maps Fourier frequency -> coefficient of A_alpha.
    Accepts either a dict keyed by alpha or a length-(m+1) sequence.
    """
    if not hasattr(coeff_maps, "get"):
        coeff_maps = dict(enumerate(coeff_maps))
    coeffs = tuple(
        ((TrigPolynomial(coeff_maps.get(a, {})),),)
        for a in range(m + 1)
    )
    return MatrixSymbol(1, m, coeffs, semiclassical)


@dataclass(frozen=True)
class PhaseSpacePoint:
    x: float
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % TWO_PI)
        object.__setattr__(self, "xi", float(self.xi))


@dataclass(frozen=True)
class ClassifiedRoot:
    point: PhaseSpacePoint
    sign: str            # "plus" or "minus"
    bracket: float


@dataclass(frozen=True)
class RootInventory:
    z: complex
    roots: tuple
    beta: int
    gamma: int
    degenerate: bool


class RegionKind(Enum):
    OUTSIDE_SIGMA = "OutsideSigma"
    IN_LAMBDA = "InLambda"
    NEAR_PHI = "NearPhi"


@dataclass(frozen=True)
class RegionClassification:
    kind: RegionKind
    inventory: RootInventory


@dataclass(frozen=True)
class RootOptions:
    grid_nx: int = 256
    grid_nxi: int = 256
    newton_tol: float = 1e-12
    max_newton: int = 60
    dedup_radius: float = 1e-6
    eps_phi_rel: float = 1e-6
    xi_window: float | None = None


# -- pointwise evaluation ---------------------------------------------------

def eval_symbol(sym: MatrixSymbol, pt: PhaseSpacePoint) -> np.ndarray:
    """p(x, xi) as a dense n x n complex matrix (principal part)."""
    out = np.zeros((sym.n, sym.n), dtype=complex)
    for a in range(sym.m + 1):
        out += sym.coeff_values(a, pt.x)[0] * pt.xi ** a
    return out


def symbol_spectrum(sym: MatrixSymbol, pt: PhaseSpacePoint) -> np.ndarray:
    """Eigenvalues of p(x, xi), sorted lexicographically by (Re, Im)."""
    vals = np.linalg.eigvals(eval_symbol(sym, pt))
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def qz(sym: MatrixSymbol, pt: PhaseSpacePoint, z: complex) -> complex:
    mat = eval_symbol(sym, pt) - z * np.eye(sym.n)
    return complex(np.linalg.det(mat))


def _adjugate(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    adj = np.empty((n, n), dtype=complex)
    idx = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = mat[np.ix_(idx != i, idx != j)]
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def _symbol_partials(sym: MatrixSymbol, pt: PhaseSpacePoint):
    """(dp/dx, dp/dxi) at pt, both exact."""
    dpx = np.zeros((sym.n, sym.n), dtype=complex)
    dpxi = np.zeros((sym.n, sym.n), dtype=complex)
    for a in range(sym.m + 1):
        dx_coeff = np.zeros((sym.n, sym.n), dtype=complex)
        for i in range(sym.n):
            for j in range(sym.n):
                dx_coeff[i, j] = sym.coeffs[a][i][j].derivative()(pt.x)
        dpx += dx_coeff * pt.xi ** a
        if a >= 1:
            dpxi += sym.coeff_values(a, pt.x)[0] * a * pt.xi ** (a - 1)
    return dpx, dpxi


def qz_gradient(sym: MatrixSymbol, pt: PhaseSpacePoint, z: complex):
    """(d_x q_z, d_xi q_z) via the Jacobi formula dq = tr(adj(p-z) dp)."""
    mat = eval_symbol(sym, pt) - z * np.eye(sym.n)
    adj = _adjugate(mat)
    dpx, dpxi = _symbol_partials(sym, pt)
    return complex(np.trace(adj @ dpx)), complex(np.trace(adj @ dpxi))


def poisson_bracket_indicator(sym: MatrixSymbol, pt: PhaseSpacePoint,
                              z: complex) -> float:
    """(1/2i)(d_xi q d_x conj(q) - d_x q d_xi conj(q)); real by construction."""
    dqx, dqxi = qz_gradient(sym, pt, z)
    value = (dqxi * np.conj(dqx) - dqx * np.conj(dqxi)) / 2j
    if abs(value.imag) > 1e-12 * (1.0 + abs(value)):
        raise ArithmeticError("bracket indicator has a non-negligible "
                              f"imaginary residue: {value!r}")
    return float(value.real)


# -- xi window --------------------------------------------------------------

def xi_window(sym: MatrixSymbol, z_sup: float) -> float:
    """Sufficient |xi| bound outside which ellipticity forces q_z != 0.

    Uses only the lower orders actually present in the symbol (plus the
    constant order), which keeps the window tight for homogeneous symbols.
    """
    sigma_min = sym.ellipticity_margin()
    lower = sym.lower_order_present()
    total_lower = sum(sym.coeff_sup_norm(a) for a in lower)
    b = (abs(z_sup) + total_lower) / sigma_min
    if b == 0.0:
        return 0.0
    exps = {0} | set(lower)
    return 2.0 * max(b ** (1.0 / (sym.m - a)) for a in exps)


# -- grid machinery ---------------------------------------------------------

def _qz_grid(sym: MatrixSymbol, x: np.ndarray, xi: np.ndarray,
             z: complex) -> np.ndarray:
    """det(p - z) on the tensor grid; shape (len(x), len(xi))."""
    n = sym.n
    mats = np.zeros((len(x), len(xi), n, n), dtype=complex)
    xipow = np.ones_like(xi)
    for a in range(sym.m + 1):
        coeff = sym.coeff_values(a, x)            # (Nx, n, n)
        mats += coeff[:, None, :, :] * xipow[None, :, None, None]
        xipow = xipow * xi
    mats -= z * np.eye(n)
    return np.linalg.det(mats)


def _local_minima(absq: np.ndarray) -> list:
    """Indices of strict-ish local minima, with x wrapped periodically."""
    nx, nxi = absq.shape
    padded = np.full((nx + 2, nxi + 2), np.inf)
    padded[1:-1, 1:-1] = absq
    padded[0, 1:-1] = absq[-1]
    padded[-1, 1:-1] = absq[0]
    center = padded[1:-1, 1:-1]
    is_min = np.ones(absq.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh = padded[1 + di:nx + 1 + di, 1 + dj:nxi + 1 + dj]
            is_min &= center <= neigh
    return list(zip(*np.nonzero(is_min)))


def _newton_refine(sym: MatrixSymbol, z: complex, x0: float, xi0: float,
                   opts: RootOptions):
    """Damped Newton on (Re q, Im q); returns (x, xi, |q|) or None."""
    x, xi = float(x0), float(xi0)
    q = qz(sym, PhaseSpacePoint(x, xi), z)
    for _ in range(opts.max_newton):
        dqx, dqxi = qz_gradient(sym, PhaseSpacePoint(x, xi), z)
        jac = np.array([[dqx.real, dqxi.real], [dqx.imag, dqxi.imag]])
        rhs = np.array([q.real, q.imag])
        try:
            step = np.linalg.solve(jac, -rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        if np.hypot(*step) < opts.newton_tol:
            return x, xi, abs(q)
        lam = 1.0
        for _ in range(25):
            xn, xin = x + lam * step[0], xi + lam * step[1]
            qn = qz(sym, PhaseSpacePoint(xn, xin), z)
            if abs(qn) < abs(q):
                break
            lam *= 0.5
        else:
            return None
        x, xi, q = xn, xin, qn
        if lam * np.hypot(*step) < opts.newton_tol:
            return x, xi, abs(q)
    return None


def find_roots(sym: MatrixSymbol, z: complex,
               opts: RootOptions = RootOptions()) -> RootInventory:
    """All zeros of q_z in the ellipticity-derived xi window, classified."""
    window = opts.xi_window if opts.xi_window is not None else xi_window(sym, abs(z))
    if window == 0.0:
        return RootInventory(z=complex(z), roots=(), beta=0, gamma=0,
                             degenerate=False)
    x = np.linspace(0.0, TWO_PI, opts.grid_nx, endpoint=False)
    xi = np.linspace(-window, window, opts.grid_nxi)
    q = _qz_grid(sym, x, xi, z)
    absq = np.abs(q)
    qscale = max(float(np.median(absq)), 1e-300)
    accept = 1e-9 * qscale
    dx = x[1] - x[0]
    dxi = xi[1] - xi[0]

    found = []
    for ix, ixi in _local_minima(absq):
        seed_val = absq[ix, ixi]
        if seed_val > 0.75 * qscale:
            continue
        res = _newton_refine(sym, z, x[ix], xi[ixi], opts)
        if res is None:
            dqx, dqxi = qz_gradient(sym, PhaseSpacePoint(x[ix], xi[ixi]), z)
            grad = math.hypot(abs(dqx), abs(dqxi))
            if seed_val < 0.25 * min(dx, dxi) * grad:
                raise NonConvergence(
                    f"Newton failed from near-root seed at x={x[ix]:.6f}, "
                    f"xi={xi[ixi]:.6f}, |q|={seed_val:.3e}")
            continue
        xr, xir, qr = res
        if qr > accept:
            continue
        if abs(xir) > window * (1.0 + 1e-9):
            continue
        found.append((xr % TWO_PI, xir))

    # deduplicate with x distance taken mod 2*pi
    unique = []
    for xr, xir in found:
        dup = False
        for xu, xiu in unique:
            ddx = min(abs(xr - xu), TWO_PI - abs(xr - xu))
            if math.hypot(ddx, xir - xiu) < max(opts.dedup_radius, 10 * dx * 1e-4):
                dup = True
                break
        if not dup:
            unique.append((xr, xir))

    roots = []
    degenerate = False
    for xr, xir in sorted(unique):
        pt = PhaseSpacePoint(xr, xir)
        bracket = poisson_bracket_indicator(sym, pt, z)
        dqx, dqxi = qz_gradient(sym, pt, z)
        eps_phi = opts.eps_phi_rel * (abs(dqx) ** 2 + abs(dqxi) ** 2)
        if abs(bracket) <= eps_phi:
            degenerate = True
        sign = "plus" if bracket > 0 else "minus"
        roots.append(ClassifiedRoot(point=pt, sign=sign, bracket=bracket))

    beta = sum(1 for r in roots if r.sign == "plus")
    gamma = len(roots) - beta
    return RootInventory(z=complex(z), roots=tuple(roots), beta=beta,
                         gamma=gamma, degenerate=degenerate)


def classify_region(sym: MatrixSymbol, z: complex,
                    opts: RootOptions = RootOptions()) -> RegionClassification:
    inv = find_roots(sym, z, opts)
    if not inv.roots:
        kind = RegionKind.OUTSIDE_SIGMA
    elif inv.degenerate:
        kind = RegionKind.NEAR_PHI
    else:
        kind = RegionKind.IN_LAMBDA
    return RegionClassification(kind=kind, inventory=inv)


# -- winding numbers --------------------------------------------------------

def winding_number(sym: MatrixSymbol, z: complex, loop: Sequence,
                   max_refine: int = 18, zero_tol: float = 1e-13) -> int:
    """Argument-variation count of q_z along a closed polyline in (x, xi).

    The polyline is traversed in the order given (counterclockwise for the
    standard orientation of the (x, xi) plane); sampling is refined until
    consecutive argument jumps stay below pi/2.
    """
    pts = [np.asarray(p, dtype=float) for p in loop]
    if not np.allclose(pts[0], pts[-1]):
        pts.append(pts[0])
    samples = []
    for a, b in zip(pts[:-1], pts[1:]):
        seg_n = 16
        samples.append(np.linspace(a, b, seg_n, endpoint=False))
    samples = np.concatenate(samples + [pts[-1][None, :]])

    def q_of(arr):
        vals = np.array([qz(sym, PhaseSpacePoint(p[0], p[1]), z) for p in arr])
        return vals

    qvals = q_of(samples)
    scale = max(float(np.max(np.abs(qvals))), 1e-300)
    for _ in range(max_refine):
        if np.min(np.abs(qvals)) < zero_tol * scale:
            raise ZeroOnContour("q_z vanishes on the contour within tolerance")
        jumps = np.angle(qvals[1:] / qvals[:-1])
        bad = np.abs(jumps) >= 0.5 * math.pi
        if not bad.any():
            total = float(np.sum(jumps))
            wind = total / TWO_PI
            return int(round(wind))
        mids = 0.5 * (samples[:-1][bad] + samples[1:][bad])
        qmids = q_of(mids)
        insert_at = np.nonzero(bad)[0] + 1
        samples = np.insert(samples, insert_at, mids, axis=0)
        qvals = np.insert(qvals, insert_at, qmids, axis=0)
    raise ZeroOnContour("contour refinement exhausted; q_z too close to zero")


def count_m_gamma(sym: MatrixSymbol, pt: PhaseSpacePoint, domain) -> int:
    """#(sigma(p(x, xi)) intersect Gamma), boundary points counted inside."""
    vals = symbol_spectrum(sym, pt)
    return int(sum(1 for v in vals if domain.contains(complex(v))))
