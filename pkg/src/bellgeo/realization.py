"""Quantum realizations (state plus binary observables) and their behaviors.

The central special case is the two-qubit family: a partially entangled
state cos(chi)|00> + sin(chi)|11> with both parties' observables in the
X-Z plane of the Bloch sphere.  General finite-dimensional realizations
are supported for the self-testing machinery, where behaviors must be
reproduced up to local isometries.

Guessing biases are computed twice, by independent routes: a closed form
in the eigenbasis of the reduced state, and a numerical maximization over
the guessing party's Hermitian operators.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .behavior import CBehavior, DBehavior
from .jsonio import dumps, loads

log = logging.getLogger(__name__)

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA2 = np.array([[0.0, -1.0j], [0.0 + 1.0j, 0.0]])
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])

#: Reduced-state eigenvalues at or below this value are treated as outside
#: the support; the excluded terms of the bias formula carry zero weight.
SUPPORT_CUTOFF = 1e-12

_VALIDATE_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TwoQubitRealization:
    """X-Z plane observables on cos(chi)|00> + sin(chi)|11>."""

    thetaA: np.ndarray
    thetaB: np.ndarray
    chi: float

    def __post_init__(self):
        object.__setattr__(self, "thetaA", _freeze(np.asarray(self.thetaA, dtype=float)))
        object.__setattr__(self, "thetaB", _freeze(np.asarray(self.thetaB, dtype=float)))
        object.__setattr__(self, "chi", float(self.chi))
        if self.thetaA.shape != (2,) or self.thetaB.shape != (2,):
            raise ValueError("thetaA and thetaB must each hold two angles")
        if not -1e-12 <= self.chi <= math.pi / 4 + 1e-12:
            raise ValueError(f"chi={self.chi} outside the convention [0, pi/4]")

    def to_json_dict(self) -> dict:
        return {"thetaA": self.thetaA, "thetaB": self.thetaB, "chi": self.chi}

    def to_json(self, indent: int | None = None) -> str:
        return dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "TwoQubitRealization":
        d = loads(text)
        return cls(thetaA=d["thetaA"], thetaB=d["thetaB"], chi=d["chi"])


def _check_observable(m: np.ndarray, dim: int, name: str):
    if m.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got {m.shape}")
    if np.abs(m - m.conj().T).max() > _VALIDATE_TOL:
        raise ValueError(f"{name} is not Hermitian")
    if np.abs(m @ m - np.eye(dim)).max() > _VALIDATE_TOL:
        raise ValueError(f"{name} does not square to the identity")


@dataclass(frozen=True)
class GeneralRealization:
    """Shared pure state with two binary observables per side."""

    dimA: int
    dimB: int
    psi: np.ndarray
    A: tuple
    B: tuple

    def __post_init__(self):
        object.__setattr__(self, "dimA", int(self.dimA))
        object.__setattr__(self, "dimB", int(self.dimB))
        psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        if psi.shape != (self.dimA * self.dimB,):
            raise ValueError("psi length must be dimA*dimB")
        if abs(np.linalg.norm(psi) - 1.0) > _VALIDATE_TOL:
            raise ValueError("psi must be normalized")
        A = tuple(_freeze(np.asarray(m, dtype=complex)) for m in self.A)
        B = tuple(_freeze(np.asarray(m, dtype=complex)) for m in self.B)
        if len(A) != 2 or len(B) != 2:
            raise ValueError("need exactly two observables per side")
        for i, m in enumerate(A):
            _check_observable(m, self.dimA, f"A[{i}]")
        for i, m in enumerate(B):
            _check_observable(m, self.dimB, f"B[{i}]")
        object.__setattr__(self, "psi", _freeze(psi))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def state_matrix(self) -> np.ndarray:
        """psi reshaped to (dimA, dimB); row index is Alice's."""
        return self.psi.reshape(self.dimA, self.dimB)

    def to_json_dict(self) -> dict:
        def mat(m):
            return [[float(z.real), float(z.imag)] for z in m.ravel()]

        return {
            "dimA": self.dimA,
            "dimB": self.dimB,
            "psi": [[float(z.real), float(z.imag)] for z in self.psi],
            "A": [mat(m) for m in self.A],
            "B": [mat(m) for m in self.B],
        }

    def to_json(self, indent: int | None = None) -> str:
        return dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "GeneralRealization":
        d = loads(text)
        dimA, dimB = int(d["dimA"]), int(d["dimB"])

        def unmat(pairs, dim):
            z = np.array([complex(re, im) for re, im in pairs])
            return z.reshape(dim, dim)

        psi = np.array([complex(re, im) for re, im in d["psi"]])
        return cls(
            dimA=dimA,
            dimB=dimB,
            psi=psi,
            A=tuple(unmat(m, dimA) for m in d["A"]),
            B=tuple(unmat(m, dimB) for m in d["B"]),
        )


@dataclass(frozen=True)
class ConditionalStates:
    """Subnormalized conditional states of the guessing party.

    ``eigenvalues`` and ``overlaps`` are taken in the eigenbasis of
    ``rhoSum``; they feed the closed-form bias formula.
    """

    rhoPlus: np.ndarray
    rhoMinus: np.ndarray
    rhoSum: np.ndarray
    eigenvalues: np.ndarray
    overlaps: np.ndarray


def xz_observable(theta: float) -> np.ndarray:
    """sin(theta)*sigma1 + cos(theta)*sigma3 as a complex matrix."""
    return (math.sin(theta) * SIGMA1 + math.cos(theta) * SIGMA3).astype(complex)


def promote(r: TwoQubitRealization) -> GeneralRealization:
    """Embed a two-qubit parameter set as an explicit realization."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.cos(r.chi)
    psi[3] = math.sin(r.chi)
    return GeneralRealization(
        dimA=2,
        dimB=2,
        psi=psi,
        A=tuple(xz_observable(t) for t in r.thetaA),
        B=tuple(xz_observable(t) for t in r.thetaB),
    )


def _as_general(r) -> GeneralRealization:
    if isinstance(r, TwoQubitRealization):
        return promote(r)
    return r


def simulate_cbehavior(r) -> CBehavior:
    """Correlators <A_x>, <B_y>, <A_x B_y> of a realization."""
    r = _as_general(r)
    m = r.state_matrix
    cA = [float(np.vdot(m, a @ m).real) for a in r.A]
    cB = [float(np.vdot(m, m @ b.T).real) for b in r.B]
    c = [[float(np.vdot(m, a @ m @ b.T).real) for b in r.B] for a in r.A]
    return CBehavior(cA=cA, cB=cB, c=c)


def conditional_states(r, side: str, setting: int) -> ConditionalStates:
    """States held by one party conditioned on the other party's outcome.

    ``side='B'`` gives Bob's states conditioned on Alice measuring setting
    ``setting``; ``side='A'`` the mirror image.
    """
    r = _as_general(r)
    m = r.state_matrix
    if side == "B":
        obs = r.A[setting]
        eye = np.eye(r.dimA)
        amp_p = ((eye + obs) / 2.0) @ m
        amp_m = ((eye - obs) / 2.0) @ m
        rho_p = amp_p.T @ amp_p.conj()
        rho_m = amp_m.T @ amp_m.conj()
    elif side == "A":
        obs = r.B[setting]
        eye = np.eye(r.dimB)
        amp_p = m @ (((eye + obs) / 2.0).T)
        amp_m = m @ (((eye - obs) / 2.0).T)
        rho_p = amp_p @ amp_p.conj().T
        rho_m = amp_m @ amp_m.conj().T
    else:
        raise ValueError("side must be 'A' or 'B'")
    rho = rho_p + rho_m
    evals, evecs = np.linalg.eigh(rho)
    overlaps = evecs.conj().T @ (rho_p - rho_m) @ evecs
    return ConditionalStates(
        rhoPlus=_freeze(rho_p),
        rhoMinus=_freeze(rho_m),
        rhoSum=_freeze(rho),
        eigenvalues=_freeze(evals),
        overlaps=_freeze(overlaps),
    )


def guessing_bias(r, side: str, setting: int, cutoff: float = SUPPORT_CUTOFF) -> float:
    """Optimal bias of guessing the remote outcome, closed form.

    Evaluates D^2 = sum_{kk'} 2|a_kk'|^2 / (m_k + m_k') over the support of
    the reduced state; the restriction makes the formula division-safe.
    """
    cs = conditional_states(r, side, setting)
    keep = cs.eigenvalues > cutoff
    m = cs.eigenvalues[keep]
    a = cs.overlaps[np.ix_(keep, keep)]
    denom = m[:, None] + m[None, :]
    d2 = float(np.sum(2.0 * np.abs(a) ** 2 / denom))
    return math.sqrt(max(d2, 0.0))


def _hermitian_basis(k: int) -> list[np.ndarray]:
    basis = []
    for i in range(k):
        e = np.zeros((k, k), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(k):
        for j in range(i + 1, k):
            e = np.zeros((k, k), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((k, k), dtype=complex)
            e[i, j] = -1.0j * inv_sqrt2
            e[j, i] = 1.0j * inv_sqrt2
            basis.append(e)
    return basis


def guessing_bias_oracle(
    r,
    side: str,
    setting: int,
    restarts: int = 20,
    iterations: int = 500,
    rng: np.random.Generator | None = None,
    grad_tol: float = 1e-13,
) -> float:
    """Guessing bias by direct maximization over the guesser's operators.

    Maximizes tr(Delta X) over Hermitian X subject to tr(rho X^2) = 1 by
    projected gradient ascent with exact line search, restricted to the
    support of the reduced state (operators outside it cannot help).
    Independent of :func:`guessing_bias`.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    cs = conditional_states(r, side, setting)
    keep = cs.eigenvalues > SUPPORT_CUTOFF
    evecs = np.linalg.eigh(np.asarray(cs.rhoSum))[1][:, keep]
    rho = evecs.conj().T @ cs.rhoSum @ evecs
    delta = evecs.conj().T @ (cs.rhoPlus - cs.rhoMinus) @ evecs
    k = rho.shape[0]
    basis = _hermitian_basis(k)
    n = len(basis)
    cvec = np.array([float(np.trace(delta @ e).real) for e in basis])
    if np.linalg.norm(cvec) < 1e-14:
        return 0.0
    q = np.empty((n, n))
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            q[i, j] = float(np.trace(rho @ (ei @ ej + ej @ ei)).real) / 2.0

    def value(v):
        return float(cvec @ v) / math.sqrt(float(v @ q @ v))

    best = -np.inf
    best_residual = np.inf
    starts = [cvec.copy()] + [rng.standard_normal(n) for _ in range(restarts - 1)]
    for v in starts:
        qn = float(v @ q @ v)
        if qn <= 0:
            continue
        v = v / math.sqrt(qn)
        for _ in range(iterations):
            qv = q @ v
            f = float(cvec @ v)
            grad = cvec - f * qv  # gradient of the scale-invariant ratio at vQv=1
            gnorm = float(np.linalg.norm(grad))
            if gnorm < grad_tol:
                break
            u = grad
            a_, b_ = f, float(cvec @ u)
            r_, s_ = float(v @ q @ u), float(u @ q @ u)
            den = b_ * r_ - a_ * s_
            if abs(den) < 1e-300:
                break
            t = (a_ * r_ - b_ * 1.0) / den
            v = v + t * u
            v = v / math.sqrt(float(v @ q @ v))
        val = value(v)
        residual = float(np.linalg.norm(cvec - val * (q @ v)))
        if val > best:
            best = val
            best_residual = residual
    if best_residual > 1e-6:
        log.warning(
            "bias maximization did not fully converge: value=%g stationarity residual=%g",
            best,
            best_residual,
        )
    return float(best)


def simulate_dbehavior(r) -> DBehavior:
    """D-space behavior: squared guessing biases plus the joint correlators."""
    r = _as_general(r)
    cb = simulate_cbehavior(r)
    deltaB = [guessing_bias(r, "B", x) ** 2 for x in range(2)]
    deltaA = [guessing_bias(r, "A", y) ** 2 for y in range(2)]
    return DBehavior(deltaB=deltaB, deltaA=deltaA, c=cb.c)


def _pad_observable(m: np.ndarray, pad: int, sign: float) -> np.ndarray:
    if pad == 0:
        return m
    dim = m.shape[0] + pad
    out = np.zeros((dim, dim), dtype=complex)
    out[: m.shape[0], : m.shape[0]] = m
    out[m.shape[0]:, m.shape[0]:] = sign * np.eye(pad)
    return out


def embed(
    r: GeneralRealization,
    unitaryA: np.ndarray | None = None,
    unitaryB: np.ndarray | None = None,
    padA: int = 0,
    padB: int = 0,
    pad_sign: float = 1.0,
) -> GeneralRealization:
    """Behavior-preserving transformation: pad with +/-I blocks, then rotate.

    The unitaries must match the padded dimensions.  The padded blocks never
    overlap the state's support, so all behaviors are unchanged.
    """
    r = _as_general(r)
    dimA, dimB = r.dimA + padA, r.dimB + padB
    m = np.zeros((dimA, dimB), dtype=complex)
    m[: r.dimA, : r.dimB] = r.state_matrix
    A = [_pad_observable(a, padA, pad_sign) for a in r.A]
    B = [_pad_observable(b, padB, pad_sign) for b in r.B]
    if unitaryA is None:
        unitaryA = np.eye(dimA)
    if unitaryB is None:
        unitaryB = np.eye(dimB)
    unitaryA = np.asarray(unitaryA, dtype=complex)
    unitaryB = np.asarray(unitaryB, dtype=complex)
    if unitaryA.shape != (dimA, dimA) or unitaryB.shape != (dimB, dimB):
        raise ValueError("unitary dimensions must match the padded realization")
    m = unitaryA @ m @ unitaryB.T
    A = [unitaryA @ a @ unitaryA.conj().T for a in A]
    B = [unitaryB @ b @ unitaryB.conj().T for b in B]
    return GeneralRealization(dimA=dimA, dimB=dimB, psi=m.reshape(-1), A=tuple(A), B=tuple(B))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random unitary via the QR decomposition with phase fixing."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    qmat, rmat = np.linalg.qr(z)
    phases = np.diag(rmat).copy()
    phases /= np.abs(phases)
    return qmat * phases


def random_two_qubit(rng: np.random.Generator) -> TwoQubitRealization:
    """Angles uniform on [0, 2pi), chi uniform on [0, pi/4]."""
    return TwoQubitRealization(
        thetaA=rng.uniform(0.0, 2.0 * math.pi, size=2),
        thetaB=rng.uniform(0.0, 2.0 * math.pi, size=2),
        chi=rng.uniform(0.0, math.pi / 4.0),
    )


def random_general(rng: np.random.Generator, dimA: int = 2, dimB: int = 2) -> GeneralRealization:
    """Haar-rotated, padded variant of a random two-qubit realization."""
    if dimA < 2 or dimB < 2:
        raise ValueError("dimensions must be at least 2")
    base = promote(random_two_qubit(rng))
    return embed(
        base,
        unitaryA=haar_unitary(rng, dimA),
        unitaryB=haar_unitary(rng, dimB),
        padA=dimA - 2,
        padB=dimB - 2,
        pad_sign=1.0 if rng.uniform() < 0.5 else -1.0,
    )
