"""Quantum Bell inequalities in guessing-bias space.

For a planar geometry this module constructs the pair of hyperplane
inequalities (one per side) that the geometry saturates simultaneously,
evaluates them on guessing-bias behaviors, verifies the two-step bound
chain they descend from, and decides whether the constructed pair pins
the geometry down uniquely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .behavior import DBehavior, DEFAULT_TOL
from .geometry import GeometryParams, d_values
from .jsonio import dumps, loads
from .realization import simulate_dbehavior


class DegenerateGeometryError(ValueError):
    """The geometry does not admit the hyperplane construction."""


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuantumBellInequality:
    """Hyperplane -sum_i Vmarg[i] delta_i + sum_ij Vcorr[i][j] C_.. <= bound.

    For side B the correlator coefficient Vcorr[x][y] multiplies C_xy;
    for side A the indexing is transposed and Vcorr[y][x] multiplies C_xy.
    """

    side: str
    Vmarg: np.ndarray
    Vcorr: np.ndarray
    q: float
    bound: float

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValueError("side must be 'A' or 'B'")
        object.__setattr__(self, "Vmarg", _freeze(self.Vmarg))
        object.__setattr__(self, "Vcorr", _freeze(self.Vcorr))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "bound", float(self.bound))

    def to_json_dict(self) -> dict:
        return {
            "side": self.side,
            "Vmarg": self.Vmarg,
            "Vcorr": self.Vcorr,
            "q": self.q,
            "bound": self.bound,
        }

    def to_json(self, indent: int | None = None) -> str:
        return dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "QuantumBellInequality":
        d = loads(text)
        return cls(side=d["side"], Vmarg=d["Vmarg"], Vcorr=d["Vcorr"], q=d["q"], bound=d["bound"])


@dataclass(frozen=True)
class QBellCoefficients:
    """Intermediates of the construction for one side.

    ``u`` is unit-norm with u00*u01 = u10*u11; ``s`` are the slopes tying
    ``u`` to the hyperplane coefficients; ``alpha`` = u01/u00 and ``beta``
    = u10/u11 parameterize the uniqueness equations (may be infinite when
    a boundary coefficient vanishes).  ``dthetaRef`` is the generating
    geometry's own-side angle difference theta_0 - theta_1.
    """

    u: np.ndarray
    s: np.ndarray
    a: float
    b: float
    alpha: float
    beta: float
    dthetaRef: float


@dataclass(frozen=True)
class UniquenessReport:
    trivialOnly: bool
    solutions: tuple


def _construct_side(side: str, delta: np.ndarray, D: np.ndarray, dtheta: float):
    sdt = math.sin(dtheta)
    if abs(sdt) < 1e-12:
        raise DegenerateGeometryError(f"side {side}: theta_0 - theta_1 is degenerate (sin = 0)")
    sd = np.sin(delta)
    pi0 = sd[0, 0] * sd[0, 1]
    pi1 = sd[1, 0] * sd[1, 1]
    denom = pi1 - pi0
    if abs(denom) < 1e-15:
        raise DegenerateGeometryError(f"side {side}: both orientation products vanish")
    ra = pi1 / denom
    rb = -pi0 / denom
    if ra < -1e-12 or rb < -1e-12:
        raise DegenerateGeometryError(
            f"side {side}: orientation condition violated (a^2={ra}, b^2={rb})"
        )
    # |sin| plus an explicit orientation keeps the hyperplane saturated from
    # below regardless of which of the two own-side angles is larger
    a = math.sqrt(max(ra, 0.0)) / abs(sdt)
    b = math.sqrt(max(rb, 0.0)) / abs(sdt)
    orient = 1.0 if sdt > 0 else -1.0
    u = orient * np.array([[a * sd[0, 1], -a * sd[0, 0]], [b * sd[1, 1], b * sd[1, 0]]])
    s = np.array([D[1] * a, D[0] * b])
    sd2 = float((s[0] * D[0]) ** 2 + (s[1] * D[1]) ** 2)
    q = 1.0 / (2.0 * math.sqrt(sd2))
    signs = np.array([[1.0, 1.0], [1.0, -1.0]])
    ineq = QuantumBellInequality(
        side=side,
        Vmarg=q * s**2,
        Vcorr=signs * s[:, None] * u,
        q=q,
        bound=1.0 / (4.0 * q),
    )
    with np.errstate(divide="ignore"):
        alpha = u[0, 1] / u[0, 0] if u[0, 0] != 0.0 else math.inf
        beta = u[1, 0] / u[1, 1] if u[1, 1] != 0.0 else math.inf
    coeff = QBellCoefficients(
        u=_freeze(u), s=_freeze(s), a=a, b=b, alpha=alpha, beta=beta, dthetaRef=dtheta
    )
    return ineq, coeff


def construct_pair(g: GeometryParams):
    """Both saturated hyperplanes of a geometry, with their intermediates."""
    dB, dA = d_values(g)
    deltaB = np.asarray(g.phiB)[:, None] - np.asarray(g.thetaB)[None, :]
    deltaA = np.asarray(g.phiA)[:, None] - np.asarray(g.thetaA)[None, :]
    ineqB, coeffB = _construct_side(
        "B", deltaB, np.sqrt(dB), float(g.thetaB[0] - g.thetaB[1])
    )
    ineqA, coeffA = _construct_side(
        "A", deltaA, np.sqrt(dA), float(g.thetaA[0] - g.thetaA[1])
    )
    return ineqB, ineqA, (coeffB, coeffA)


def evaluate(ineq: QuantumBellInequality, d: DBehavior) -> float:
    if ineq.side == "B":
        return float(-np.dot(ineq.Vmarg, d.deltaB) + np.sum(ineq.Vcorr * d.c))
    return float(-np.dot(ineq.Vmarg, d.deltaA) + np.sum(ineq.Vcorr * d.c.T))


def chain_slacks(
    ineq: QuantumBellInequality, coeff: QBellCoefficients, d: DBehavior
) -> dict:
    """Slacks of the two-step bound chain on a guessing-bias behavior.

    The hyperplane value is first bounded by
    -q * sum (s_i D_i)^2 + sqrt(sum (s_i D_i)^2) and that in turn by
    1/(4q); both slacks are nonnegative for quantum behaviors.
    """
    value = evaluate(ineq, d)
    delta = d.deltaB if ineq.side == "B" else d.deltaA
    sd2 = float(np.sum(coeff.s**2 * delta))
    middle = -ineq.q * sd2 + math.sqrt(sd2)
    return {
        "value": value,
        "middle": middle,
        "bound": ineq.bound,
        "slackCrypt": middle - value,
        "slackQuadratic": ineq.bound - middle,
    }


def verify_cryptographic_chain(
    g: GeometryParams, r, tol: float = DEFAULT_TOL, require_match: bool = True
) -> dict:
    """Evaluate the bound chain of g's pair on a realization's behavior.

    With ``require_match`` the realization's behavior must reproduce the
    geometry's own behavior, in which case both slacks vanish.
    """
    from .realization import promote, simulate_cbehavior  # local to avoid cycles in callers

    ineqB, ineqA, (coeffB, coeffA) = construct_pair(g)
    d = simulate_dbehavior(r)
    if require_match:
        from .geometry import two_qubit_of

        ref = simulate_cbehavior(promote(two_qubit_of(g)))
        got = simulate_cbehavior(r)
        mismatch = max(
            np.abs(ref.cA - got.cA).max(),
            np.abs(ref.cB - got.cB).max(),
            np.abs(ref.c - got.c).max(),
        )
        if mismatch > math.sqrt(tol):
            raise ValueError(f"realization behavior differs from geometry by {mismatch}")
    return {
        "B": chain_slacks(ineqB, coeffB, d),
        "A": chain_slacks(ineqA, coeffA, d),
    }


def recovered_d_squared(coeff: QBellCoefficients, q: float, t: float) -> tuple[float, float]:
    """Squared biases determined by the coefficients and an angle cosine t."""
    al, be = coeff.alpha, coeff.beta
    denom = al + 1.0 / al + be + 1.0 / be
    d0 = (al + 1.0 / al + 2.0 * t) / (4.0 * (coeff.s[0] * q) ** 2 * denom)
    d1 = (be + 1.0 / be - 2.0 * t) / (4.0 * (coeff.s[1] * q) ** 2 * denom)
    return float(d0), float(d1)


def _ratio_numerators(u: np.ndarray, t):
    t = np.asarray(t, dtype=float)
    return np.stack(
        [
            u[0, 0] + u[0, 1] * t,
            u[0, 1] + u[0, 0] * t,
            u[1, 0] - u[1, 1] * t,
            u[1, 1] - u[1, 0] * t,
        ]
    )


def _ratio_values(coeff: QBellCoefficients, t):
    """The four squared ratios of the uniqueness system, as functions of
    t = cos(theta_0 - theta_1), normalized to 1 at the reference angle."""
    tref = math.cos(coeff.dthetaRef)
    ref = _ratio_numerators(coeff.u, tref)
    if np.abs(ref).min() < 1e-10:
        raise DegenerateGeometryError(
            "a uniqueness-equation denominator vanishes at the reference angle"
        )
    num = _ratio_numerators(coeff.u, t)
    return (num / ref.reshape((4,) + (1,) * np.ndim(t))) ** 2


def uniqueness_check(
    g: GeometryParams,
    tol: float = 1e-8,
    grid_resolution: float = 1e-3,
    nontrivial_distance: float = 1e-4,
) -> UniquenessReport:
    """Decide whether g's hyperplane pair admits only the trivial solution.

    The four equations equate side-A and side-B squared ratios, each a
    function of one angle cosine; the solver scans the unit square on a
    grid, refines every local minimum of the residual, and classifies the
    refined roots by distance from the reference cosines.
    """
    _, _, (coeffB, coeffA) = construct_pair(g)
    tA_ref = math.cos(coeffA.dthetaRef)
    tB_ref = math.cos(coeffB.dthetaRef)
    n = int(round(2.0 / grid_resolution)) + 1
    ts = np.linspace(-1.0, 1.0, n)
    ga = _ratio_values(coeffA, ts)  # (4, n)
    gb = _ratio_values(coeffB, ts)
    res = np.zeros((n, n))
    for k in range(4):
        res += (ga[k][:, None] - gb[k][None, :]) ** 2

    def residual_vec(x):
        return (_ratio_values(coeffA, x[0]) - _ratio_values(coeffB, x[1])).ravel()

    interior = res[1:-1, 1:-1]
    is_min = (
        (interior <= res[:-2, 1:-1])
        & (interior <= res[2:, 1:-1])
        & (interior <= res[1:-1, :-2])
        & (interior <= res[1:-1, 2:])
        & (interior < 1e-3)
    )
    ii, jj = np.nonzero(is_min)
    starts = [(ts[i + 1], ts[j + 1]) for i, j in zip(ii, jj)]
    # border rows/columns can hold minima of their own
    for i in (0, n - 1):
        j = int(np.argmin(res[i]))
        if res[i, j] < 1e-3:
            starts.append((ts[i], ts[j]))
        j2 = int(np.argmin(res[:, i]))
        if res[j2, i] < 1e-3:
            starts.append((ts[j2], ts[i]))
    if len(starts) > 256:
        # degenerate geometries produce whole valleys of minima; a sample
        # of them is enough to detect the nontrivial solutions
        starts = starts[:: len(starts) // 256 + 1]
    starts.append((tA_ref, tB_ref))

    solutions: list[tuple[float, float, float]] = []
    for x0 in starts:
        fit = least_squares(
            residual_vec, x0=np.array(x0), bounds=([-1.0, -1.0], [1.0, 1.0]), xtol=1e-14
        )
        r2 = float(np.sum(fit.fun**2))
        if r2 > tol:
            continue
        ta, tb = float(fit.x[0]), float(fit.x[1])
        if any(
            abs(ta - s[0]) <= nontrivial_distance and abs(tb - s[1]) <= nontrivial_distance
            for s in solutions
        ):
            continue
        solutions.append((ta, tb, r2))
    trivial_only = all(
        abs(ta - tA_ref) <= nontrivial_distance and abs(tb - tB_ref) <= nontrivial_distance
        for ta, tb, _ in solutions
    )
    return UniquenessReport(trivialOnly=bool(trivial_only), solutions=tuple(solutions))
