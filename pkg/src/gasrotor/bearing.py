"""Herringbone-grooved journal bearing film model.

The film is treated with the classical groove-averaged (narrow-groove
theory) form of the isothermal compressible Reynolds equation, following
the treatment introduced by Vohr & Chow (J. Basic Eng. 87, 1965) for
fine-pitch grooved bearings: the groove/ridge stripe pattern is replaced
by an anisotropic effective conductivity tensor plus an effective Couette
transport vector.  For a concentric journal the smoothed problem reduces
to a one-dimensional two-point boundary-value problem along the axial
coordinate; journal whirl enters as a first-order complex perturbation.

Dimensionless conventions used throughout (fixed, shared with the
surrogate features):

* pressures by ambient ``p_a``, film thicknesses by the ridge clearance
  ``h_r``, plan-form lengths by the journal radius ``R``,
* compressibility number ``Lambda = 6 mu Omega (R/h_r)^2 / p_a``,
* whirl speed ratio ``nu`` = excitation frequency / rotation frequency,
* stiffness ``K_dim = K * p_a R L / h_r`` and damping
  ``C_dim = C * p_a R L / (h_r Omega)`` for the dimensionless 2x2
  matrices returned here.

Geometry: chevron grooves occupy two bands of total axial fraction
``gamma`` adjacent to the bearing ends, pumping toward the plain central
land; the chevron sign and the band edges are regularised over a fixed
fraction of the bearing length (quintic smoothstep), which stands in for
the finite groove pitch of a real bearing and keeps the averaged
coefficient fields twice continuously differentiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, InvariantError, SingularSystemError

#: Half-width of the groove-pattern transition zones, as a fraction of the
#: bearing half-length.  Stands in for one groove pitch of smearing.
TRANSITION_FRACTION = 0.05

#: Damped-Newton settings for the steady (zeroth-order) solve.
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50

DEFAULT_GRID_N = 101


@dataclass(frozen=True)
class HGJBGeometry:
    """Grooved-bearing design parameters (SI units, angles in rad)."""

    alpha: float   # groove-ridge width ratio (-)
    beta: float    # groove angle (rad)
    gamma: float   # grooved region ratio (-)
    h_g: float     # groove depth (m)
    h_r: float     # local bearing clearance (m)
    L: float       # bearing length (m)
    D: float       # bearing diameter (m)

    def __post_init__(self):
        checks = [
            (0.0 < self.alpha < 1.0, "alpha", "must be in (0, 1)"),
            (0.0 < self.beta < math.pi, "beta", "must be in (0, pi)"),
            (0.0 < self.gamma <= 1.0, "gamma", "must be in (0, 1]"),
            (self.h_g >= 0.0, "h_g", "must be >= 0"),
            (self.h_r > 0.0, "h_r", "must be > 0"),
            (self.L > 0.0, "L", "must be > 0"),
            (self.D > 0.0, "D", "must be > 0"),
        ]
        for ok, name, msg in checks:
            if not ok:
                raise InvariantError(f"hgjb.{name} {msg}, got {getattr(self, name)}",
                                     path=f"hgjb.{name}")

    @property
    def R(self) -> float:
        return self.D / 2.0

    @property
    def hg_hr(self) -> float:
        return self.h_g / self.h_r

    @property
    def L_D(self) -> float:
        return self.L / self.D


@dataclass(frozen=True)
class OperatingPoint:
    """Ambient conditions and target speed."""

    fluid: str
    p_a: float  # ambient pressure (Pa)
    T: float    # ambient temperature (K)
    N: float    # rotational speed (rpm)

    def __post_init__(self):
        if not self.p_a > 0:
            raise InvariantError(f"operating.p_a must be > 0, got {self.p_a}", path="operating.p_a")
        if not self.T > 0:
            raise InvariantError(f"operating.T must be > 0, got {self.T}", path="operating.T")
        if self.N < 0:
            raise InvariantError(f"operating.N must be >= 0, got {self.N}", path="operating.N")

    @property
    def omega(self) -> float:
        """Angular speed in rad/s."""
        return 2.0 * math.pi * self.N / 60.0


@dataclass(frozen=True)
class DimensionlessPoint:
    """The dimensionless groups that fully determine one film solution."""

    Lambda: float
    nu: float
    alpha: float
    beta: float
    gamma: float
    hg_hr: float
    L_D: float

    def __post_init__(self):
        if self.Lambda < 0:
            raise InvariantError("Lambda must be >= 0", path="Lambda")
        if not self.nu > 0:
            raise InvariantError("nu must be > 0", path="nu")


@dataclass(frozen=True)
class BearingCoefficients:
    """Dimensionless 2x2 stiffness and damping matrices at one (Lambda, nu)."""

    K: np.ndarray
    C: np.ndarray
    Lambda: float
    nu: float


def compressibility_number(mu: float, Omega: float, R: float, p_a: float, h_r: float) -> float:
    """Lambda = 6 mu Omega (R / h_r)^2 / p_a."""
    return 6.0 * mu * Omega * (R / h_r) ** 2 / p_a


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """Quintic smoothstep, C^2 on all of R: 0 below 0, 1 above 1."""
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (u * (6.0 * u - 15.0) + 10.0)


def _groove_zone_coeffs(alpha: float, beta: float, hg_hr: float) -> dict[str, float]:
    """Groove-averaged tensor entries and their clearance derivatives at H = 1.

    ``A1``/``A2`` are the cubic film conductances of groove and ridge
    stripes; the averaged entries follow from flux matching across and
    along the stripes (arithmetic mean along the grooves, harmonic-type
    mean across them).
    """
    s, c = math.sin(beta), math.cos(beta)
    s2, c2, sc = s * s, c * c, s * c
    A1 = (1.0 + hg_hr) ** 3
    A2 = 1.0
    dA1 = 3.0 * (1.0 + hg_hr) ** 2
    dA2 = 3.0
    Aa = alpha * A1 + (1.0 - alpha) * A2              # along-groove (arithmetic)
    dAa = alpha * dA1 + (1.0 - alpha) * dA2
    Dm = (1.0 - alpha) * A1 + alpha * A2
    dDm = (1.0 - alpha) * dA1 + alpha * dA2
    Ah = A1 * A2 / Dm                                  # across-groove (harmonic-type)
    dAh = (dA1 * A2 + A1 * dA2 - Ah * dDm) / Dm
    Hm = 1.0 + alpha * hg_hr                           # mean film
    dHm = 1.0
    Ns = alpha * A2 * (1.0 + hg_hr) + (1.0 - alpha) * A1
    dNs = alpha * (dA2 * (1.0 + hg_hr) + A2) + (1.0 - alpha) * (dA1 + A1)
    Hs = Ns / Dm                                       # effective transported film
    dHs = (dNs - Hs * dDm) / Dm
    return {
        "att": Aa * c2 + Ah * s2, "datt": dAa * c2 + dAh * s2,
        "azz": Aa * s2 + Ah * c2, "dazz": dAa * s2 + dAh * c2,
        "atz": (Aa - Ah) * sc, "datz": (dAa - dAh) * sc,
        "et": Hm * c2 + Hs * s2, "det": dHm * c2 + dHs * s2,
        "ez": (Hm - Hs) * sc, "dez": (dHm - dHs) * sc,
        "hm": Hm,
    }


class _Fields:
    """Blended coefficient fields sampled on a set of axial stations."""

    def __init__(self, zeta: np.ndarray, zone: dict[str, float],
                 alpha: float, hg_hr: float, gamma: float, half_len: float):
        w = TRANSITION_FRACTION * half_len
        zeta_land = (1.0 - gamma) * half_len
        g = _smoothstep((np.abs(zeta) - (zeta_land - w)) / (2.0 * w))
        sg = 2.0 * _smoothstep((zeta + w) / (2.0 * w)) - 1.0
        gs = g * sg
        self.att = g * zone["att"] + (1.0 - g)
        self.datt = g * zone["datt"] + (1.0 - g) * 3.0
        self.azz = g * zone["azz"] + (1.0 - g)
        self.dazz = g * zone["dazz"] + (1.0 - g) * 3.0
        self.atz = gs * zone["atz"]
        self.datz = gs * zone["datz"]
        self.et = g * zone["et"] + (1.0 - g)
        self.det = g * zone["det"] + (1.0 - g)
        self.ez = gs * zone["ez"]
        self.dez = gs * zone["dez"]
        self.hbar = 1.0 + g * alpha * hg_hr


class GroovedFilmSolver:
    """Finite-difference solution of one concentric grooved film.

    Instances are immutable after construction and cache the steady
    pressure profile; whirl impedances for many speed ratios are computed
    in one vectorised batch of tridiagonal solves.
    """

    def __init__(self, alpha: float, beta: float, gamma: float, hg_hr: float,
                 L_D: float, Lambda: float, grid_n: int = DEFAULT_GRID_N):
        if grid_n < 11 or grid_n % 2 == 0:
            raise InvariantError(f"grid_n must be odd and >= 11, got {grid_n}", path="grid_n")
        if Lambda < 0:
            raise InvariantError("Lambda must be >= 0", path="Lambda")
        self.alpha, self.beta, self.gamma = alpha, beta, gamma
        self.hg_hr, self.L_D, self.Lambda = hg_hr, L_D, Lambda
        self.grid_n = grid_n
        self.half_len = L_D  # L / (2R)
        self.zeta = np.linspace(-self.half_len, self.half_len, grid_n)
        self.dz = self.zeta[1] - self.zeta[0]
        zone = _groove_zone_coeffs(alpha, beta, hg_hr)
        faces = 0.5 * (self.zeta[:-1] + self.zeta[1:])
        self._node = _Fields(self.zeta, zone, alpha, hg_hr, gamma, self.half_len)
        self._face = _Fields(faces, zone, alpha, hg_hr, gamma, self.half_len)
        self._P0: np.ndarray | None = None
        self.newton_iterations = 0
        self.newton_residual = 0.0

    # -- steady state -------------------------------------------------------

    def _steady_residual(self, P: np.ndarray) -> np.ndarray:
        """Net mass imbalance of every interior cell, in flux units."""
        f = self._face
        Pm = 0.5 * (P[:-1] + P[1:])
        dP = np.diff(P) / self.dz
        flux = Pm * (f.azz * dP - self.Lambda * f.ez)
        return np.diff(flux)

    def pressure_profile(self) -> np.ndarray:
        """Steady dimensionless pressure ``P0`` on the axial grid (cached)."""
        if self._P0 is not None:
            return self._P0
        n, dz, lam = self.grid_n, self.dz, self.Lambda
        f = self._face
        # Convergence is judged on the per-cell mass imbalance relative to
        # the nominal pumping flux scale, so the criterion is grid-uniform.
        tol = NEWTON_TOL * (1.0 + lam)
        P = np.ones(n)
        residual = self._steady_residual(P)
        for iteration in range(NEWTON_MAX_ITER + 1):
            res_norm = float(np.max(np.abs(residual))) if residual.size else 0.0
            if res_norm <= tol:
                self.newton_iterations = iteration
                self.newton_residual = res_norm
                self._P0 = P
                return P
            if iteration == NEWTON_MAX_ITER:
                break
            Pm = 0.5 * (P[:-1] + P[1:])
            dP = np.diff(P) / dz
            base = 0.5 * (f.azz * dP - lam * f.ez)
            dflux_lo = base - Pm * f.azz / dz   # d flux_f / d P_j
            dflux_hi = base + Pm * f.azz / dz   # d flux_f / d P_{j+1}
            # Tridiagonal Jacobian of the interior cell imbalances.
            m = n - 2
            diag = dflux_lo[1:] - dflux_hi[:-1]
            lower = -dflux_lo[:-1]
            upper = dflux_hi[1:]
            ab = np.zeros((3, m))
            ab[0, 1:] = upper[:-1]
            ab[1, :] = diag
            ab[2, :-1] = lower[1:]
            try:
                step = solve_banded((1, 1), ab, -residual)
            except Exception as exc:  # pragma: no cover - defensive
                raise SingularSystemError(f"steady Jacobian solve failed: {exc}") from None
            if not np.all(np.isfinite(step)):
                raise SingularSystemError("steady Jacobian produced non-finite step")
            scale = 1.0
            biggest = float(np.max(np.abs(step)))
            if biggest > 0.5:
                scale = 0.5 / biggest
            while scale > 1e-6:
                P_new = P.copy()
                P_new[1:-1] += scale * step
                if np.all(P_new > 0.05):
                    new_residual = self._steady_residual(P_new)
                    if np.max(np.abs(new_residual)) < np.max(np.abs(residual)) or scale == 1.0:
                        P, residual = P_new, new_residual
                        break
                scale *= 0.5
            else:
                raise ConvergenceError(
                    "steady film solve stalled", residual=float(np.max(np.abs(residual)))
                )
        raise ConvergenceError(
            f"steady film solve did not reach {NEWTON_TOL:g} in {NEWTON_MAX_ITER} iterations",
            residual=float(np.max(np.abs(residual))),
        )

    # -- first-order whirl response -----------------------------------------

    def impedances(self, nu_signed: np.ndarray, eps: float = 1e-3) -> np.ndarray:
        """Complex force impedance for each signed whirl ratio.

        The first-order (linear) perturbation problem is assembled once;
        the excitation enters only through ``2 i Lambda nu`` terms, so all
        requested ratios are solved as one batch of tridiagonal systems.
        The perturbation amplitude ``eps`` scales the forcing and is
        divided back out of the response; the first-order model is exactly
        linear in it.
        """
        nu_signed = np.atleast_1d(np.asarray(nu_signed, dtype=float))
        P0 = self.pressure_profile()
        n, dz, lam = self.grid_n, self.dz, self.Lambda
        nd, fc = self._node, self._face
        P0f = 0.5 * (P0[:-1] + P0[1:])
        dP0f = np.diff(P0) / dz
        dP0n = np.zeros(n)
        dP0n[1:-1] = (P0[2:] - P0[:-2]) / (2.0 * dz)
        dP0n[0] = (P0[1] - P0[0]) / dz
        dP0n[-1] = (P0[-1] - P0[-2]) / dz

        c2f = P0f * fc.azz
        c1f = fc.azz * dP0f - lam * fc.ez + 1j * P0f * fc.atz
        s1f = P0f * dP0f * fc.dazz - lam * P0f * fc.dez
        b1 = 1j * P0[1:-1] * nd.atz[1:-1]
        c0_base = (-P0 * nd.att + 1j * nd.atz * dP0n - 1j * lam * nd.et)[1:-1]
        s0_base = (1j * P0 * dP0n * nd.datz - 1j * lam * P0 * nd.det)[1:-1]

        inv_dz2 = 1.0 / dz**2
        inv_2dz = 1.0 / (2.0 * dz)
        lo_base = c2f[:-1] * inv_dz2 - c1f[:-1] * inv_2dz - b1 * inv_2dz
        up_base = c2f[1:] * inv_dz2 + c1f[1:] * inv_2dz + b1 * inv_2dz
        di_base = -(c2f[1:] + c2f[:-1]) * inv_dz2 + (c1f[1:] - c1f[:-1]) * inv_2dz + c0_base
        rhs_base = -(np.diff(s1f) / dz + s0_base)

        m = nu_signed.size
        di = di_base[None, :] + (2j * lam * nu_signed)[:, None] * nd.hbar[None, 1:-1]
        rhs = (rhs_base[None, :] - (2j * lam * nu_signed)[:, None] * P0[None, 1:-1]) * eps
        lo = np.broadcast_to(lo_base, (m, lo_base.size))
        up = np.broadcast_to(up_base, (m, up_base.size))

        if m <= 16:
            # pivoted banded solves beat the python-loop Thomas on small batches
            k = rhs.shape[1]
            P1 = np.zeros((m, k + 2), dtype=complex)
            ab = np.zeros((3, k), dtype=complex)
            for row in range(m):
                ab[0, 1:] = up_base[:-1]
                ab[1, :] = di[row]
                ab[2, :-1] = lo_base[1:]
                try:
                    P1[row, 1:-1] = solve_banded((1, 1), ab, rhs[row])
                except Exception as exc:
                    raise SingularSystemError(
                        f"first-order film system is singular: {exc}") from None
            if not np.all(np.isfinite(P1)):
                raise SingularSystemError("first-order film solve produced non-finite values")
            P1 = P1 / eps
        else:
            P1 = _solve_tridiagonal_batch(lo, di, up, rhs) / eps
        # trapezoid with zero end values
        integral = dz * P1.sum(axis=1)
        return -(math.pi / (2.0 * self.L_D)) * np.conj(integral)

    def coefficients(self, nu: np.ndarray, eps: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
        """Dimensionless (K, C) 2x2 stacks for an array of whirl ratios > 0.

        A forward and a backward circular-whirl solve per ratio determine
        the isotropic matrix structure ``[[a, b], [-b, a]]`` of both K and C.
        """
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        if np.any(nu <= 0):
            raise InvariantError("whirl speed ratios must be > 0", path="nu")
        z = self.impedances(np.concatenate([nu, -nu]), eps=eps)
        zf, zb = z[: nu.size], z[nu.size:]
        k = 0.5 * (zf.real + zb.real)
        kc = -0.5 * (zf.imag + zb.imag)
        c = (zf.imag - zb.imag) / (2.0 * nu)
        cc = (zf.real - zb.real) / (2.0 * nu)
        K = np.empty((nu.size, 2, 2))
        C = np.empty((nu.size, 2, 2))
        K[:, 0, 0] = K[:, 1, 1] = k
        K[:, 0, 1] = kc
        K[:, 1, 0] = -kc
        C[:, 0, 0] = C[:, 1, 1] = c
        C[:, 0, 1] = cc
        C[:, 1, 0] = -cc
        return K, C


def _solve_tridiagonal_batch(lo: np.ndarray, di: np.ndarray, up: np.ndarray,
                             rhs: np.ndarray) -> np.ndarray:
    """Thomas algorithm vectorised over a batch of complex systems.

    Falls back to LAPACK's pivoted banded solver for any system whose
    forward sweep degenerates.  Returns the interior solution padded with
    the homogeneous Dirichlet end values.
    """
    m, k = rhs.shape
    cp = np.empty((m, k), dtype=complex)
    dp = np.empty((m, k), dtype=complex)
    denom = di[:, 0].copy()
    bad = np.abs(denom) < 1e-300
    denom[bad] = 1.0
    cp[:, 0] = up[:, 0] / denom
    dp[:, 0] = rhs[:, 0] / denom
    for i in range(1, k):
        denom = di[:, i] - lo[:, i] * cp[:, i - 1]
        small = np.abs(denom) < 1e-300
        bad |= small
        denom = np.where(small, 1.0, denom)
        cp[:, i] = up[:, i] / denom
        dp[:, i] = (rhs[:, i] - lo[:, i] * dp[:, i - 1]) / denom
    x = np.empty((m, k), dtype=complex)
    x[:, -1] = dp[:, -1]
    for i in range(k - 2, -1, -1):
        x[:, i] = dp[:, i] - cp[:, i] * x[:, i + 1]
    bad |= ~np.all(np.isfinite(x), axis=1)
    # verify the unpivoted sweep; re-solve degenerate rows with pivoting
    resid = di * x - rhs
    resid[:, 1:] += lo[:, 1:] * x[:, :-1]
    resid[:, :-1] += up[:, :-1] * x[:, 1:]
    scale = np.abs(rhs).max(axis=1) + np.abs(x).max(axis=1) * np.abs(di).max(axis=1) + 1e-300
    bad |= np.abs(resid).max(axis=1) / scale > 1e-9
    if np.any(bad):
        for row in np.flatnonzero(bad):
            ab = np.zeros((3, k), dtype=complex)
            ab[0, 1:] = up[row, :-1]
            ab[1, :] = di[row, :]
            ab[2, :-1] = lo[row, 1:]
            try:
                x[row] = solve_banded((1, 1), ab, rhs[row])
            except Exception as exc:
                raise SingularSystemError(f"first-order film system is singular: {exc}") from None
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("first-order film solve produced non-finite values")
    full = np.zeros((m, k + 2), dtype=complex)
    full[:, 1:-1] = x
    return full


# ---------------------------------------------------------------------------
# public operations


@dataclass(frozen=True)
class ZerothOrderSolution:
    """Steady axial pressure profile with solver diagnostics."""

    zeta: np.ndarray      # axial stations, z / R
    P0: np.ndarray        # dimensionless pressure p / p_a
    residual: float
    iterations: int


def solve_zeroth_order(geom: HGJBGeometry, Lambda: float,
                       grid_n: int = DEFAULT_GRID_N) -> ZerothOrderSolution:
    """Steady concentric pressure profile over ``z in [-L/2, L/2]``."""
    solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                               geom.L_D, Lambda, grid_n)
    P0 = solver.pressure_profile()
    return ZerothOrderSolution(zeta=solver.zeta, P0=P0,
                               residual=solver.newton_residual,
                               iterations=solver.newton_iterations)


def dynamic_coefficients(geom: HGJBGeometry, Lambda: float, nu: float,
                         eps: float = 1e-3, grid_n: int = DEFAULT_GRID_N) -> BearingCoefficients:
    """Dimensionless dynamic stiffness and damping at one (Lambda, nu)."""
    if not (0.0 < eps <= 0.05):
        raise InvariantError(f"eps must be in (0, 0.05], got {eps}", path="eps")
    if not nu > 0:
        raise InvariantError(f"nu must be > 0, got {nu}", path="nu")
    solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                               geom.L_D, Lambda, grid_n)
    K, C = solver.coefficients(np.array([nu]), eps=eps)
    return BearingCoefficients(K=K[0], C=C[0], Lambda=Lambda, nu=nu)


def dimensionalize(coeffs: BearingCoefficients, geom: HGJBGeometry, p_a: float,
                   Omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Dimensional (K [N/m], C [N s/m]) from dimensionless coefficients."""
    scale = p_a * geom.R * geom.L / geom.h_r
    if Omega <= 0:
        raise InvariantError("damping re-dimensionalisation needs Omega > 0", path="operating.N")
    return coeffs.K * scale, coeffs.C * scale / Omega


def power_loss(geom: HGJBGeometry, mu: float, Omega: float) -> float:
    """Couette shear loss in W over ridge, groove and land zones."""
    R = geom.R
    grooved = geom.gamma * geom.L * (geom.alpha / (geom.h_r + geom.h_g)
                                     + (1.0 - geom.alpha) / geom.h_r)
    plain = (1.0 - geom.gamma) * geom.L / geom.h_r
    return mu * Omega**2 * R**3 * 2.0 * math.pi * (plain + grooved)


def load_capacity_proxy(coeffs: BearingCoefficients, geom: HGJBGeometry, p_a: float) -> float:
    """Static load capacity estimate in N.

    Allows 25 % of the clearance as static eccentricity against the
    weakest direction of the synchronous (nu = 1) stiffness; a proxy, not
    a load integration.
    """
    if abs(coeffs.nu - 1.0) > 1e-9:
        raise InvariantError(f"load capacity proxy needs nu = 1 coefficients, got nu={coeffs.nu}",
                             path="nu")
    K_dim = coeffs.K * p_a * geom.R * geom.L / geom.h_r
    k_min = float(np.linalg.svd(K_dim, compute_uv=False)[-1])
    return 0.25 * geom.h_r * k_min
