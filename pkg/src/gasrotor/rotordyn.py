"""Rigid-rotor lateral dynamics on two journal bearings.

Four degrees of freedom ``q = (x, y, theta_x, theta_y)`` at the centre of
gravity, gyroscopically coupled through the polar inertia, supported by
two bearings with (generally frequency-dependent) 2x2 stiffness and
damping matrices.  Bearing lateral displacements follow the convention
``u = x + z theta_y`` and ``v = y - z theta_x`` for a bearing at axial
offset ``z`` from the CG (right-handed axes, spin about +z).

Stability is evaluated with the whirl-ratio sweep: for an assumed
excitation at ``nu`` times the rotation speed the bearing coefficients
are evaluated at that ratio, and a mode is excited when its eigenfrequency
ratio crosses the assumed ratio (``Im lambda / Omega = nu``).  The
logarithmic decrement at the self-consistent point decides stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .errors import (InvariantError, ModeTrackingError, ModeValidityError,
                     SingularSystemError)
from .rotor import MassProperties

MODE_NAMES = {1: "cylindrical-forward", 2: "cylindrical-backward",
              3: "conical-forward", 4: "conical-backward"}

#: Default whirl-ratio grid of the intersection sweep.
NU_START, NU_STOP, NU_STEP = 0.05, 2.0, 0.01

#: |Re lambda| below this fraction of |Im lambda| counts as marginal (delta = 0).
_MARGINAL_RTOL = 1e-12

#: Recursive halvings allowed when eigenvectors veer between grid points.
_TRACK_DEPTH = 6

#: Validity envelope of the intersection method: beyond this |log dec| a
#: crossing mode decays or grows an order of magnitude faster than it
#: whirls, the eigenvalue sits nearly on the real axis, and delta (~1/Im)
#: is numerically ill-conditioned.  Such evaluations fail loudly instead
#: of reporting meaningless decrements.
LOG_DEC_LIMIT = 60.0


@dataclass(frozen=True)
class RigidRotorModel:
    """Rigid rotor on two bearings at offsets ``z1 < z2`` from the CG."""

    mass: float
    I_transverse: float
    I_polar: float
    z1: float
    z2: float
    Omega: float  # spin speed, rad/s

    def __post_init__(self):
        if not (self.mass > 0 and self.I_transverse > 0 and self.I_polar > 0):
            raise InvariantError("mass and inertias must be positive", path="rotor_model")
        if not self.z1 < self.z2:
            raise InvariantError("bearings must be distinct with z1 < z2", path="rotor_model.z2")
        if self.Omega < 0:
            raise InvariantError("Omega must be >= 0", path="rotor_model.Omega")

    @property
    def bearing_span(self) -> float:
        return self.z2 - self.z1


@dataclass(frozen=True)
class ModeStabilityResult:
    """Outcome of the whirl sweep for one rigid-body mode."""

    mode_id: int                      # key into MODE_NAMES
    excited: bool
    stable: bool | None               # defined only when excited
    whirl_speed_ratio: float | None   # nu*, present iff excited
    log_dec: float | None             # delta at nu*, present iff excited

    def __post_init__(self):
        if self.mode_id not in MODE_NAMES:
            raise InvariantError(f"unknown mode id {self.mode_id}", path="mode_id")
        if self.excited:
            if self.whirl_speed_ratio is None or self.log_dec is None or self.stable is None:
                raise InvariantError("excited mode needs nu* and log_dec", path="mode")
            if not self.whirl_speed_ratio > 0:
                raise InvariantError("nu* must be positive", path="whirl_speed_ratio")
        elif not (self.stable is None and self.whirl_speed_ratio is None and self.log_dec is None):
            raise InvariantError("non-excited mode carries no stability outputs", path="mode")

    @property
    def name(self) -> str:
        return MODE_NAMES[self.mode_id]


def assemble(mp: MassProperties, Omega: float) -> RigidRotorModel:
    """Rotor model from mass properties; bearing offsets come from the journals."""
    z1, z2 = mp.bearing_offsets
    if z1 == z2:
        raise InvariantError("journal midplanes coincide", path="rotor.journal_b")
    return RigidRotorModel(mass=mp.mass, I_transverse=mp.I_transverse,
                           I_polar=mp.I_polar, z1=z1, z2=z2, Omega=Omega)


def _lever(z: float) -> np.ndarray:
    return np.array([[1.0, 0.0, 0.0, z],
                     [0.0, 1.0, -z, 0.0]])


def system_matrices(model: RigidRotorModel,
                    bearings: Sequence[tuple[np.ndarray, np.ndarray]]
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(M, D, K) of ``M q'' + D q' + K q = 0`` with D = damping + gyroscopics."""
    M = np.diag([model.mass, model.mass, model.I_transverse, model.I_transverse])
    G = np.zeros((4, 4))
    G[2, 3] = model.I_polar * model.Omega
    G[3, 2] = -model.I_polar * model.Omega
    K4 = np.zeros((4, 4))
    C4 = np.zeros((4, 4))
    for (Kb, Cb), z in zip(bearings, (model.z1, model.z2)):
        T = _lever(z)
        K4 += T.T @ np.asarray(Kb) @ T
        C4 += T.T @ np.asarray(Cb) @ T
    return M, C4 + G, K4


def _state_matrix(model: RigidRotorModel, K4: np.ndarray, D4: np.ndarray) -> np.ndarray:
    minv = 1.0 / np.array([model.mass, model.mass, model.I_transverse, model.I_transverse])
    A = np.zeros(K4.shape[:-2] + (8, 8))
    A[..., :4, 4:] = np.eye(4)
    A[..., 4:, :4] = -minv[:, None] * K4
    A[..., 4:, 4:] = -minv[:, None] * D4
    return A


def eigen_at(model: RigidRotorModel,
             bearings: Sequence[tuple[np.ndarray, np.ndarray]]
             ) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the first-order (state-space) form.

    Returns 8 complex eigenvalues and the 8x8 matrix of state eigenvectors
    (displacements stacked over velocities), sorted by imaginary then real
    part for determinism.
    """
    M, D, K = system_matrices(model, bearings)
    if not (np.all(np.isfinite(D)) and np.all(np.isfinite(K))):
        raise InvariantError("bearing coefficient matrices must be finite", path="bearings")
    try:
        lam, vec = np.linalg.eig(_state_matrix(model, K, D))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"eigen solve failed: {exc}") from None
    order = np.lexsort((lam.real, lam.imag))
    return lam[order], vec[:, order]


def _eigen_grid(model: RigidRotorModel, stacks) -> tuple[np.ndarray, np.ndarray]:
    """Stacked eigen solutions for per-bearing coefficient stacks (M, 2, 2)."""
    n = stacks[0][0].shape[0]
    K4 = np.zeros((n, 4, 4))
    C4 = np.zeros((n, 4, 4))
    for (Kb, Cb), z in zip(stacks, (model.z1, model.z2)):
        T = _lever(z)
        K4 += np.einsum("ab,nbc,cd->nad", T.T, Kb, T, optimize=True)
        C4 += np.einsum("ab,nbc,cd->nad", T.T, Cb, T, optimize=True)
    C4[:, 2, 3] += model.I_polar * model.Omega
    C4[:, 3, 2] -= model.I_polar * model.Omega
    try:
        lam, vec = np.linalg.eig(_state_matrix(model, K4, C4))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"eigen solve failed: {exc}") from None
    order = np.lexsort((lam.real, lam.imag), axis=-1)
    lam_sorted = np.take_along_axis(lam, order, axis=1)
    vec_sorted = np.take_along_axis(vec, order[:, None, :], axis=2)
    return lam_sorted, vec_sorted


def log_decrement(lam: complex) -> float:
    """delta = -2 pi Re(lambda) / |Im(lambda)|; positive for decaying whirl."""
    if lam.imag == 0:
        raise InvariantError("log decrement undefined for non-oscillatory eigenvalue",
                             path="eigenvalue")
    if abs(lam.real) <= _MARGINAL_RTOL * abs(lam.imag):
        return 0.0
    return -2.0 * math.pi * lam.real / abs(lam.imag)


# ---------------------------------------------------------------------------
# whirl-ratio sweep

CoefficientProvider = Callable[[float], Sequence[tuple[np.ndarray, np.ndarray]]]


def default_nu_grid(start: float = NU_START, stop: float = NU_STOP,
                    step: float = NU_STEP) -> np.ndarray:
    return np.arange(start, stop + step / 2.0, step)


def _normalize_provider(provider):
    """Accept either per-bearing sequences or a single (K, C) pair."""
    def call(nu: float):
        out = provider(nu)
        if isinstance(out, tuple) and len(out) == 2 and np.asarray(out[0]).shape == (2, 2):
            return (out, out)
        return tuple(out)
    return call


def _classify(vec: np.ndarray, span_half: float) -> int:
    """Mode id (1..4) from the displacement part of an eigenvector."""
    x, y, tx, ty = vec[:4]
    translation = math.hypot(abs(x), abs(y))
    tilt = math.hypot(abs(tx), abs(ty)) * span_half
    if translation >= tilt:
        return 1 if (x * np.conj(y)).imag > 0 else 2
    return 3 if (tx * np.conj(ty)).imag > 0 else 4


def _oscillatory(lam: np.ndarray) -> np.ndarray:
    """Whirl-mode candidates: meaningfully oscillatory eigenvalues.

    Creeping, essentially-real eigenvalues carry imaginary parts at noise
    level and flicker across zero; requiring Im above a small fraction of
    the magnitude keeps only modes whose oscillation is physical (the cut
    corresponds to an absurd log decrement of ~6e2, an order of magnitude
    beyond the heaviest genuinely whirling modes).
    """
    return np.flatnonzero(lam.imag > 1e-2 * np.abs(lam))


def _candidates(lam: np.ndarray, vec: np.ndarray) -> tuple[list[complex], np.ndarray]:
    """Oscillatory eigenvalues and their unit displacement shapes (4, k)."""
    idx = _oscillatory(lam)
    if idx.size == 0:
        return [], np.zeros((4, 0), dtype=complex)
    V = vec[:4, idx]
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    return [complex(l) for l in lam[idx]], V


@lru_cache(maxsize=64)
def _perm_array(n_from: int, n_to: int) -> np.ndarray:
    return np.array(list(permutations(range(n_to), n_from)), dtype=int)


def _best_assignment(macs: np.ndarray) -> list[tuple[int, int]]:
    """Injective (row, column) pairs maximising total MAC."""
    nb, nc = macs.shape
    if nb == 0 or nc == 0:
        return []
    if nb <= nc:
        perms = _perm_array(nb, nc)
        scores = macs[np.arange(nb)[None, :], perms].sum(axis=1)
        best = perms[int(np.argmax(scores))]
        return [(r, int(c)) for r, c in enumerate(best)]
    perms = _perm_array(nc, nb)
    scores = macs[perms, np.arange(nc)[None, :]].sum(axis=1)
    best = perms[int(np.argmax(scores))]
    return [(int(r), c) for c, r in enumerate(best)]


def _mac_matrix(V_from: np.ndarray, V_to: np.ndarray) -> np.ndarray:
    """Pairwise MAC between columns of two unit-column matrices."""
    return np.abs(V_from.conj().T @ V_to) ** 2


class _Branch:
    __slots__ = ("vec", "lams", "vecs", "votes")

    def __init__(self, vec: np.ndarray, backfill: int = 0):
        self.vec = vec
        self.lams: list[complex] = [complex(np.nan, np.nan)] * backfill
        self.vecs: list[np.ndarray | None] = [None] * backfill
        self.votes = np.zeros(4)


def _match_interval(model, provider, nu_lo: float, V_lo: np.ndarray,
                    nu_hi: float, V_hi: np.ndarray, mac_min: float,
                    depth: int) -> dict[int, int]:
    """Column mapping from V_lo to V_hi, recursively bridging veering zones."""
    macs = _mac_matrix(V_lo, V_hi)
    pairs = _best_assignment(macs)
    if all(macs[r, c] >= mac_min for r, c in pairs):
        return dict(pairs)
    if depth <= 0:
        worst = min(macs[r, c] for r, c in pairs)
        raise ModeTrackingError(
            f"eigenvector match dropped to MAC={worst:.3f} "
            f"between nu={nu_lo:.5f} and nu={nu_hi:.5f}", nu_lo=nu_lo, nu_hi=nu_hi)
    mid = 0.5 * (nu_lo + nu_hi)
    lam_m, vec_m = eigen_at(model, provider(mid))
    _, V_mid = _candidates(lam_m, vec_m)
    first = _match_interval(model, provider, nu_lo, V_lo, mid, V_mid, mac_min, depth - 1)
    second = _match_interval(model, provider, mid, V_mid, nu_hi, V_hi, mac_min, depth - 1)
    return {r: second[m] for r, m in first.items() if m in second}


def intersection_sweep(model: RigidRotorModel, coefficient_provider,
                       nu_grid: np.ndarray | None = None,
                       mac_min: float = 0.9,
                       g_tol: float = 1e-6,
                       max_bisect: int = 40,
                       log_dec_limit: float = LOG_DEC_LIMIT) -> list[ModeStabilityResult]:
    """Whirl sweep over ``nu_grid`` returning one result per mode id 1..4.

    ``coefficient_provider(nu)`` supplies the dimensional per-bearing
    (K, C) matrices at excitation frequency ``nu * Omega``; providers may
    expose ``batch(nu_array)`` returning per-bearing stacked matrices to
    amortise film solves over the grid.  Eigenvector continuity is
    enforced with a modal assurance criterion of at least ``mac_min``,
    recursively sub-stepping across veering zones before reporting a
    tracking ambiguity.
    """
    if model.Omega <= 0:
        raise InvariantError("whirl sweep undefined at Omega = 0", path="rotor_model.Omega")
    if nu_grid is None:
        nu_grid = default_nu_grid()
    nu_grid = np.asarray(nu_grid, dtype=float)
    if nu_grid.ndim != 1 or nu_grid.size < 2 or np.any(np.diff(nu_grid) <= 0):
        raise InvariantError("nu_grid must be strictly increasing", path="nu_grid")

    provider = _normalize_provider(coefficient_provider)
    span_half = model.bearing_span / 2.0

    if hasattr(coefficient_provider, "batch"):
        lam_all, vec_all = _eigen_grid(model, coefficient_provider.batch(nu_grid))
    else:
        lam_list, vec_list = [], []
        for nu in nu_grid:
            lam, vec = eigen_at(model, provider(float(nu)))
            lam_list.append(lam)
            vec_list.append(vec)
        lam_all, vec_all = np.stack(lam_list), np.stack(vec_list)

    branches: list[_Branch] = []
    for i in range(nu_grid.size):
        lams_i, V_i = _candidates(lam_all[i], vec_all[i])
        k = len(lams_i)
        matched: set[int] = set()
        if branches and k:
            V_prev = np.stack([b.vec for b in branches], axis=1)
            mapping = _match_interval(model, provider, float(nu_grid[i - 1]), V_prev,
                                      float(nu_grid[i]), V_i, mac_min, _TRACK_DEPTH) \
                if i > 0 else {}
            for bi, ci in mapping.items():
                b = branches[bi]
                b.vec = V_i[:, ci]
                b.lams.append(lams_i[ci])
                b.vecs.append(V_i[:, ci])
                b.votes[_classify(V_i[:, ci], span_half) - 1] += 1
                matched.add(ci)
        for ci in range(k):
            if ci not in matched:
                b = _Branch(V_i[:, ci], backfill=i)
                b.lams.append(lams_i[ci])
                b.vecs.append(V_i[:, ci])
                b.votes[_classify(V_i[:, ci], span_half) - 1] += 1
                branches.append(b)
        for b in branches:
            if len(b.lams) < i + 1:
                b.lams.append(complex(np.nan, np.nan))
                b.vecs.append(None)

    ids = _assign_mode_ids(branches)
    results: dict[int, ModeStabilityResult] = {}
    for b, mode_id in zip(branches, ids):
        if mode_id is None:
            continue
        res = _branch_result(b, mode_id, model, provider, nu_grid, g_tol, max_bisect,
                             mac_min, log_dec_limit)
        prev = results.get(mode_id)
        if prev is None or (res.excited and not prev.excited):
            results[mode_id] = res
    out = []
    for mode_id in (1, 2, 3, 4):
        out.append(results.get(mode_id) or ModeStabilityResult(
            mode_id=mode_id, excited=False, stable=None,
            whirl_speed_ratio=None, log_dec=None))
    return out


def _assign_mode_ids(branches: list[_Branch]) -> list[int | None]:
    """Injective branch -> mode-id map maximising the classification votes."""
    if not branches:
        return []
    k = len(branches)
    ids: list[int | None] = [None] * k
    candidates = sorted(range(k), key=lambda b: -branches[b].votes.sum())[:4]
    best_perm, best_score = None, -1.0
    for perm in permutations(range(4), len(candidates)):
        score = sum(branches[b].votes[m] for b, m in zip(candidates, perm))
        if score > best_score:
            best_perm, best_score = perm, score
    for b, m in zip(candidates, best_perm):
        ids[b] = m + 1
    return ids


def _branch_result(branch: _Branch, mode_id: int, model: RigidRotorModel,
                   provider, nu_grid: np.ndarray, g_tol: float,
                   max_bisect: int, mac_min: float,
                   log_dec_limit: float = LOG_DEC_LIMIT) -> ModeStabilityResult:
    lams = np.array(branch.lams)
    g = lams.imag / model.Omega - nu_grid[: lams.size]
    valid = np.isfinite(g)
    crossing = None
    for i in range(len(g) - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        if g[i] == 0.0 or g[i] * g[i + 1] < 0:
            crossing = i
            break
    if crossing is None:
        return ModeStabilityResult(mode_id=mode_id, excited=False, stable=None,
                                   whirl_speed_ratio=None, log_dec=None)

    lo, hi = float(nu_grid[crossing]), float(nu_grid[crossing + 1])
    g_lo = float(g[crossing])
    nu_star, lam_star, g_star = lo, lams[crossing], abs(g_lo)
    # reference shape at the crossing itself; refreshed during bisection
    ref_vec = branch.vecs[crossing] if branch.vecs[crossing] is not None else branch.vec
    for _ in range(max_bisect):
        if g_star < g_tol:
            break
        mid = 0.5 * (lo + hi)
        lam_m, vec_m = eigen_at(model, provider(mid))
        lams_m, V_m = _candidates(lam_m, vec_m)
        if not lams_m:
            break
        macs = _mac_matrix(ref_vec[:, None], V_m)[0]
        j = int(np.argmax(macs))
        if macs[j] < mac_min:
            raise ModeTrackingError(
                f"lost mode {mode_id} while refining between nu={lo:.4f} and nu={hi:.4f}",
                nu_lo=lo, nu_hi=hi)
        ref_vec = V_m[:, j]
        g_mid = lams_m[j].imag / model.Omega - mid
        if abs(g_mid) < g_star:
            nu_star, lam_star, g_star = mid, lams_m[j], abs(g_mid)
        if g_lo * g_mid <= 0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    delta = log_decrement(complex(lam_star))
    if abs(delta) > log_dec_limit:
        raise ModeValidityError(
            f"mode {mode_id} crosses at nu={nu_star:.4f} with log decrement "
            f"{delta:.1f}, outside the +/-{log_dec_limit:g} validity envelope "
            f"of the whirl intersection method")
    return ModeStabilityResult(mode_id=mode_id, excited=True, stable=bool(delta > 0),
                               whirl_speed_ratio=float(nu_star), log_dec=float(delta))
