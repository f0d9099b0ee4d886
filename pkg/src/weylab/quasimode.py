"""Leading-order WKB quasimodes chi(x) a0(x) e^{i phi(x)/h} at classified roots.

The phase solves the eikonal equation lambda(x, phi'(x)) = z by Newton
continuation of xi(x) in complex xi; the amplitude carries the half-density
factor (d_xi lambda)^{-1/2}.  Only the leading amplitude is built, so the
guaranteed residual is O(h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline

from .discretize import OperatorMatrix
from .errors import BranchLoss, CutoffTooWide, MultipleEigenvalue
from .symbol import (ClassifiedRoot, MatrixSymbol, PhaseSpacePoint, TWO_PI,
                     find_roots)

SQRT_2PI = math.sqrt(TWO_PI)

_STEP = 1e-3            # continuation step in x
_NEWTON_TOL = 1e-12
_GAP_TOL = 1e-6


@dataclass(frozen=True)
class EigenBranch:
    """A locally simple eigenvalue branch lambda(x, xi) of p(x, xi) near a root.

    For n = 1 the branch is the symbol itself and every derivative is exact;
    for n > 1 values come from per-point eigendecompositions selected by
    continuity and derivatives from the left/right eigenvector formula.
    """

    sym: MatrixSymbol
    root: ClassifiedRoot
    z: complex
    gap: float

    def _matrix(self, x: float, xi: complex) -> np.ndarray:
        out = np.zeros((self.sym.n, self.sym.n), dtype=complex)
        xp = 1.0 + 0.0j
        for a in range(self.sym.m + 1):
            out += self.sym.coeff_values(a, x)[0] * xp
            xp *= xi
        return out

    def _matrix_dxi(self, x: float, xi: complex) -> np.ndarray:
        out = np.zeros((self.sym.n, self.sym.n), dtype=complex)
        xp = 1.0 + 0.0j
        for a in range(1, self.sym.m + 1):
            out += a * self.sym.coeff_values(a, x)[0] * xp
            xp *= xi
        return out

    def _matrix_dx(self, x: float, xi: complex) -> np.ndarray:
        out = np.zeros((self.sym.n, self.sym.n), dtype=complex)
        xp = 1.0 + 0.0j
        for a in range(self.sym.m + 1):
            block = np.array(
                [[self.sym.coeffs[a][i][j].derivative()(x)
                  for j in range(self.sym.n)] for i in range(self.sym.n)],
                dtype=complex)
            out += block * xp
            xp *= xi
        return out

    def value(self, x: float, xi: complex, ref: complex | None = None) -> complex:
        if self.sym.n == 1:
            acc, xp = 0.0 + 0.0j, 1.0 + 0.0j
            for a in range(self.sym.m + 1):
                acc += complex(self.sym.coeffs[a][0][0](x)) * xp
                xp *= xi
            return acc
        vals = np.linalg.eigvals(self._matrix(x, xi))
        target = self.z if ref is None else ref
        return complex(vals[np.argmin(np.abs(vals - target))])

    def _pair(self, x: float, xi: complex, ref: complex):
        """(lambda, right vec, left vec) of the branch nearest ref."""
        mat = self._matrix(x, xi)
        vals, lvecs, rvecs = scipy.linalg.eig(mat, left=True, right=True)
        idx = int(np.argmin(np.abs(vals - ref)))
        return complex(vals[idx]), rvecs[:, idx], lvecs[:, idx]

    def dxi(self, x: float, xi: complex, ref: complex | None = None) -> complex:
        if self.sym.n == 1:
            acc, xp = 0.0 + 0.0j, 1.0 + 0.0j
            for a in range(1, self.sym.m + 1):
                acc += a * complex(self.sym.coeffs[a][0][0](x)) * xp
                xp *= xi
            return acc
        ref = self.z if ref is None else ref
        _, v, w = self._pair(x, xi, ref)
        return complex((w.conj() @ self._matrix_dxi(x, xi) @ v)
                       / (w.conj() @ v))

    def dx(self, x: float, xi: complex, ref: complex | None = None) -> complex:
        if self.sym.n == 1:
            acc, xp = 0.0 + 0.0j, 1.0 + 0.0j
            for a in range(self.sym.m + 1):
                acc += complex(self.sym.coeffs[a][0][0].derivative()(x)) * xp
                xp *= xi
            return acc
        ref = self.z if ref is None else ref
        _, v, w = self._pair(x, xi, ref)
        return complex((w.conj() @ self._matrix_dx(x, xi) @ v)
                       / (w.conj() @ v))

    def eigvec(self, x: float, xi: complex,
               ref: complex | None = None) -> np.ndarray:
        if self.sym.n == 1:
            return np.ones(1, dtype=complex)
        ref = self.z if ref is None else ref
        _, v, _ = self._pair(x, xi, ref)
        return v / np.linalg.norm(v)


def locate_branch(sym: MatrixSymbol, z: complex, root: ClassifiedRoot,
                  gap_tol: float = _GAP_TOL) -> EigenBranch:
    """Attach the simple eigenvalue branch through the root to work on."""
    x0, xi0 = root.point.x, root.point.xi
    branch = EigenBranch(sym=sym, root=root, z=complex(z), gap=np.inf)
    if sym.n == 1:
        val = branch.value(x0, xi0)
        if abs(val - z) > 1e-10:
            raise ValueError(f"root does not satisfy lambda = z: |diff| = "
                             f"{abs(val - z):.2e}")
        return branch
    vals = np.linalg.eigvals(branch._matrix(x0, xi0))
    order = np.argsort(np.abs(vals - z))
    if abs(vals[order[0]] - z) > 1e-10:
        raise ValueError("no eigenvalue of p(root) matches z to 1e-10")
    gap = abs(vals[order[1]] - vals[order[0]]) if len(vals) > 1 else np.inf
    if gap <= gap_tol:
        raise MultipleEigenvalue(
            f"eigenvalue gap {gap:.2e} at the root is below gap_tol "
            f"{gap_tol:.2e}")
    return EigenBranch(sym=sym, root=root, z=complex(z), gap=float(gap))


@dataclass(frozen=True)
class Phase:
    """Eikonal phase on a uniform grid around the root."""

    x_grid: np.ndarray
    xi: np.ndarray                # xi(x), complex continuation
    phi: np.ndarray               # int_{x_root}^x xi(s) ds
    phi_second_at_root: complex
    x_root: float
    xi_root: float
    root_index: int
    z: complex


def _cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral on a uniform grid, third-order at every node."""
    out = np.zeros(len(y), dtype=y.dtype)
    if len(y) < 2:
        return out
    if len(y) == 2:
        out[1] = 0.5 * dx * (y[0] + y[1])
        return out
    # local quadratic through (y[k-1], y[k], y[k+1]) integrated over one step
    inc = np.empty(len(y) - 1, dtype=y.dtype)
    inc[0] = dx * (5 * y[0] + 8 * y[1] - y[2]) / 12.0
    inc[1:] = dx * (-y[:-2] + 8 * y[1:-1] + 5 * y[2:]) / 12.0
    out[1:] = np.cumsum(inc)
    return out


def _continue_xi(branch: EigenBranch, xs: np.ndarray, xi0: complex,
                 step_cap: float) -> np.ndarray:
    """Newton continuation of lambda(x, xi(x)) = z along increasing index."""
    out = np.empty(len(xs), dtype=complex)
    xi = complex(xi0)
    lam_ref = branch.z
    for idx, x in enumerate(xs):
        for _ in range(60):
            f = branch.value(float(x), xi, ref=lam_ref) - branch.z
            if abs(f) < _NEWTON_TOL:
                break
            dp = branch.dxi(float(x), xi, ref=lam_ref)
            if dp == 0:
                raise BranchLoss(f"d_xi lambda vanished at x = {x:.6f}")
            xi = xi - f / dp
            if abs(xi - xi0) > step_cap:
                raise BranchLoss(
                    f"continuation left the basin at x = {x:.6f} "
                    f"(|xi - xi_root| > {step_cap:.3g})")
        else:
            raise BranchLoss(f"eikonal Newton stalled at x = {x:.6f}")
        out[idx] = xi
    return out


def solve_eikonal(branch: EigenBranch, x_interval) -> Phase:
    """Continue xi(x) from the root and integrate the phase."""
    x_lo, x_hi = float(x_interval[0]), float(x_interval[1])
    x0 = branch.root.point.x
    xi0 = complex(branch.root.point.xi)
    if not x_lo < x0 < x_hi:
        raise ValueError("interval must contain the root base point")
    dlam = branch.dxi(x0, xi0)
    if abs(dlam) < 1e-12:
        raise ValueError("d_xi lambda vanishes at the root; no simple branch")
    step_cap = 10.0 * max(abs(xi0), 1.0)

    n_right = max(int(math.ceil((x_hi - x0) / _STEP)), 2)
    n_left = max(int(math.ceil((x0 - x_lo) / _STEP)), 2)
    xs_right = x0 + (x_hi - x0) * np.arange(n_right + 1) / n_right
    xs_left = x0 - (x0 - x_lo) * np.arange(n_left + 1) / n_left

    xi_right = _continue_xi(branch, xs_right, xi0, step_cap)
    xi_left = _continue_xi(branch, xs_left, xi0, step_cap)

    phi_right = _cumulative_simpson(xi_right, xs_right[1] - xs_right[0])
    phi_left = -_cumulative_simpson(xi_left, xs_left[0] - xs_left[1])

    x_grid = np.concatenate([xs_left[::-1], xs_right[1:]])
    xi_vals = np.concatenate([xi_left[::-1], xi_right[1:]])
    phi = np.concatenate([phi_left[::-1], phi_right[1:]])
    root_index = n_left

    # phi'' at the root from implicit differentiation of the eikonal
    phi2 = -branch.dx(x0, xi0) / dlam
    return Phase(x_grid=x_grid, xi=xi_vals, phi=phi,
                 phi_second_at_root=complex(phi2), x_root=x0,
                 xi_root=float(xi0.real), root_index=root_index,
                 z=branch.z)


def leading_amplitude(branch: EigenBranch, phase: Phase) -> np.ndarray:
    """Half-density amplitude a0(x) (times the eigenvector field for n > 1).

    a0 = (d_xi lambda(root) / d_xi lambda(x, xi(x)))^{1/2} with the square
    root branch continued from a0(x_root) = 1.
    """
    g = np.array([branch.dxi(float(x), xi)
                  for x, xi in zip(phase.x_grid, phase.xi)], dtype=complex)
    # continuous log via accumulated increments from the root outward
    ratios = g[1:] / g[:-1]
    inc = np.log(ratios)
    log_g = np.zeros(len(g), dtype=complex)
    log_g[phase.root_index + 1:] = np.cumsum(inc[phase.root_index:])
    log_g[:phase.root_index] = -np.cumsum(inc[:phase.root_index][::-1])[::-1]
    a0 = np.exp(-0.5 * log_g)

    if branch.sym.n == 1:
        return a0[:, None]
    vecs = np.empty((len(phase.x_grid), branch.sym.n), dtype=complex)
    prev = branch.eigvec(phase.x_root, complex(phase.xi[phase.root_index]))
    vecs[phase.root_index] = prev
    for idx in range(phase.root_index + 1, len(phase.x_grid)):
        v = branch.eigvec(float(phase.x_grid[idx]), phase.xi[idx])
        ph = np.vdot(prev, v)
        v = v * (abs(ph) / ph) if ph != 0 else v
        vecs[idx] = v
        prev = v
    prev = vecs[phase.root_index]
    for idx in range(phase.root_index - 1, -1, -1):
        v = branch.eigvec(float(phase.x_grid[idx]), phase.xi[idx])
        ph = np.vdot(prev, v)
        v = v * (abs(ph) / ph) if ph != 0 else v
        vecs[idx] = v
        prev = v
    return a0[:, None] * vecs


@dataclass(frozen=True)
class CutoffOptions:
    support_radius: float | None = None   # None -> auto from root separation
    plateau_fraction: float = 0.5
    c0_min: float = 1e-9
    max_radius: float = math.pi / 2


@dataclass(frozen=True)
class Quasimode:
    samples: np.ndarray           # (N, n) values on the uniform circle grid
    x: np.ndarray
    center: ClassifiedRoot
    z: complex
    h: float
    plateau_radius: float
    support_radius: float
    c0_edge: float
    norm_record: float

    def component(self, i: int = 0) -> np.ndarray:
        return self.samples[:, i]

    def l2_norm(self) -> float:
        dx = TWO_PI / len(self.x)
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * dx))


def _bump(d: np.ndarray, r0: float, w: float) -> np.ndarray:
    """Smooth cutoff: 1 on |d| <= r0, 0 on |d| >= w."""
    def f(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out
    t = (np.abs(d) - r0) / (w - r0)
    num = f(1.0 - t)
    return num / (num + f(t))


def _auto_radius(sym: MatrixSymbol, z: complex, root: ClassifiedRoot,
                 opts: CutoffOptions, inventory=None) -> float:
    inv = inventory if inventory is not None else find_roots(sym, z)
    w = opts.max_radius
    for other in inv.roots:
        dx = abs(other.point.x - root.point.x)
        dx = min(dx, TWO_PI - dx)
        if dx > 1e-9:
            w = min(w, 0.5 * dx)
    return w


def build_quasimode(sym: MatrixSymbol, z: complex, root: ClassifiedRoot,
                    h: float, grid_size: int,
                    opts: CutoffOptions = CutoffOptions(),
                    inventory=None) -> Quasimode:
    """Normalized samples of chi(x) a0(x) e^{i phi(x)/h} on a uniform grid."""
    if root.sign != "plus":
        raise ValueError("forward quasimodes are built at plus-roots; build "
                         "the adjoint-side mode via build_adjoint_quasimode")
    return _build(sym, z, root, h, grid_size, opts, inventory)


def build_adjoint_quasimode(sym: MatrixSymbol, z: complex,
                            minus_root: ClassifiedRoot, h: float,
                            grid_size: int,
                            opts: CutoffOptions = CutoffOptions(),
                            inventory=None) -> Quasimode:
    """Quasimode of the adjoint at conj(z), centered at a minus-root of p.

    The bracket flips sign under p -> p*, z -> conj(z), so the minus-root
    becomes a plus-root of the adjoint principal symbol and the same
    construction applies.
    """
    if minus_root.sign != "minus":
        raise ValueError("adjoint-side quasimodes are built at minus-roots")
    adj = sym.adjoint_principal()
    zbar = complex(z).conjugate()
    adj_inv = find_roots(adj, zbar) if inventory is None else inventory
    target = None
    for r in adj_inv.roots:
        dx = abs(r.point.x - minus_root.point.x)
        dx = min(dx, TWO_PI - dx)
        if dx < 1e-6 and abs(r.point.xi - minus_root.point.xi) < 1e-6:
            target = r
    if target is None or target.sign != "plus":
        raise ValueError("could not match the minus-root to a plus-root of "
                         "the adjoint symbol")
    return _build(adj, zbar, target, h, grid_size, opts, adj_inv)


def _build(sym, z, root, h, grid_size, opts, inventory) -> Quasimode:
    w = (opts.support_radius if opts.support_radius is not None
         else _auto_radius(sym, z, root, opts, inventory))
    branch = locate_branch(sym, z, root)
    x0 = root.point.x
    phase = solve_eikonal(branch, (x0 - w, x0 + w))
    amp = leading_amplitude(branch, phase)

    im_phi = phase.phi.imag
    if np.min(im_phi) < -1e-10:
        raise CutoffTooWide(
            f"Im(phase) dips to {np.min(im_phi):.3e} inside radius {w:.4f}; "
            f"shrink support_radius")
    c0 = float(min(im_phi[0], im_phi[-1]))
    if c0 <= opts.c0_min:
        raise CutoffTooWide(
            f"Im(phase) = {c0:.3e} at the support edge (radius {w:.4f}) "
            f"is not positive")

    r0 = opts.plateau_fraction * w
    # interpolate the continuation data onto the circle grid
    sp_phi = CubicSpline(phase.x_grid, phase.phi)
    sp_amp = [CubicSpline(phase.x_grid, amp[:, i]) for i in range(sym.n)]

    N = int(grid_size)
    xs = TWO_PI * np.arange(N) / N
    d = np.mod(xs - x0 + math.pi, TWO_PI) - math.pi
    inside = np.abs(d) < w
    samples = np.zeros((N, sym.n), dtype=complex)
    if np.any(inside):
        xloc = x0 + d[inside]
        chi = _bump(d[inside], r0, w)
        osc = np.exp(1j * sp_phi(xloc) / h)
        for i in range(sym.n):
            samples[inside, i] = chi * sp_amp[i](xloc) * osc
    dx = TWO_PI / N
    norm = float(np.sqrt(np.sum(np.abs(samples) ** 2) * dx))
    if norm == 0.0:
        raise CutoffTooWide("cutoff support missed every grid point")
    samples /= norm
    return Quasimode(samples=samples, x=xs, center=root, z=complex(z), h=h,
                     plateau_radius=r0, support_radius=w, c0_edge=c0,
                     norm_record=norm)


# -- Fourier projection and residuals ----------------------------------------

def fourier_coefficients(q: Quasimode, K: int) -> np.ndarray:
    """Coefficients against e_k = e^{ikx}/sqrt(2 pi), component-major layout."""
    N, n = q.samples.shape
    if N < 2 * (2 * K + 1):
        raise ValueError("sampling grid too coarse for the requested K")
    out = np.empty(n * (2 * K + 1), dtype=complex)
    scale = SQRT_2PI / N
    for i in range(n):
        F = np.fft.fft(q.samples[:, i])
        ks = np.arange(-K, K + 1)
        out[i * (2 * K + 1):(i + 1) * (2 * K + 1)] = scale * F[ks % N]
    return out


def residual(mat: OperatorMatrix, q: Quasimode) -> float:
    """||M u_hat|| / ||u_hat|| for M the truncation of P - z."""
    c = fourier_coefficients(q, mat.trunc.K)
    nc = np.linalg.norm(c)
    if nc == 0.0:
        raise ValueError("quasimode projects to zero on the truncation")
    return float(np.linalg.norm(mat.entries @ c) / nc)


def overlap_profile(alpha: int, j: int, i: int, e_plus: Quasimode,
                    e_minus: Quasimode, h: float) -> np.ndarray:
    """<e_k (hD)^alpha e_{+,j}, e_{-,i}> for all k = -N/2..N/2-1 via one FFT.

    Returns the length-N array indexed by k mod N (np.fft layout).
    """
    if len(e_plus.x) != len(e_minus.x):
        raise ValueError("quasimode grids differ")
    N = len(e_plus.x)
    freqs = np.fft.fftfreq(N, d=1.0 / N)       # integer frequencies
    u = e_plus.samples[:, j]
    du = np.fft.ifft(np.fft.fft(u) * (h * freqs) ** alpha)
    w = du * np.conj(e_minus.samples[:, i])
    # <e_k f> = (2 pi / N) sum f(x_m) e^{ik x_m} / sqrt(2 pi)
    F = np.fft.fft(w)
    prof = np.empty(N, dtype=complex)
    idx = (-np.arange(N)) % N
    prof[:] = (TWO_PI / N) * F[idx] / SQRT_2PI
    return prof


def overlap_coefficient(k: int, alpha: int, j: int, i: int,
                        e_plus: Quasimode, e_minus: Quasimode,
                        h: float) -> complex:
    N = len(e_plus.x)
    prof = overlap_profile(alpha, j, i, e_plus, e_minus, h)
    return complex(prof[k % N])


def overlap_variance(law, e_plus: Quasimode, e_minus: Quasimode,
                     h: float) -> float:
    """Deterministic sigma^2(h) = sum sigma^2 |<e_k (hD)^alpha e_+, e_->|^2."""
    n = e_plus.samples.shape[1]
    if law.n != n or e_minus.samples.shape[1] != n:
        raise ValueError("law and quasimode dimensions differ")
    total = 0.0
    ks = np.arange(-law.K_q, law.K_q + 1)
    for alpha in range(law.alpha_min, law.alpha_max + 1):
        for i in range(n):
            for j in range(n):
                prof = overlap_profile(alpha, j, i, e_plus, e_minus, h)
                vals = prof[ks % len(prof)]
                sig = np.array([law.sigma_rule(alpha, i, j, int(k), h)
                                for k in ks])
                total += float(np.sum(sig ** 2 * np.abs(vals) ** 2))
    return total


def save_quasimode(q: Quasimode, path) -> None:
    """Plot-ready table: x, then Re/Im per component."""
    with open(path, "w") as fh:
        n = q.samples.shape[1]
        header = "x " + " ".join(f"re{i} im{i}" for i in range(n))
        fh.write(header + "\n")
        for xv, row in zip(q.x, q.samples):
            vals = " ".join(f"{float(v.real)!r} {float(v.imag)!r}"
                            for v in row)
            fh.write(f"{float(xv)!r} {vals}\n")
