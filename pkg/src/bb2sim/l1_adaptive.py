"""Sampled-data L1 adaptive augmentation for the heading/depth autopilot.

The reference model is two decoupled critically damped (by default) second-order
channels ordered (psi, z). Per channel the state is (y, y_dot):

    A = [[0, 1], [-wn^2, -2 zeta wn]],  B = [0, wn^2]^T,  C = [1, 0].

All discretizations are exact zero-order-hold ones built from matrix exponentials
(scipy's scaling-and-squaring Pade ``expm``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .errors import IllConditioned, NonMinimumPhase


@dataclass(frozen=True)
class ReferenceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    omega_n: float = 0.08
    zeta: float = 1.0

    @property
    def K_g(self) -> np.ndarray:
        return -np.linalg.inv(self.C @ np.linalg.solve(self.A, self.B))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def transfer(self, s: complex) -> np.ndarray:
        return self.C @ np.linalg.solve(s * np.eye(self.n) - self.A, self.B)


def build_reference_model(omega_n: float = 0.08, zeta: float = 1.0, channels: int = 2) -> ReferenceModel:
    if not (omega_n > 0 and zeta > 0):
        raise ValueError("omega_n and zeta must be positive")
    a = np.array([[0.0, 1.0], [-omega_n**2, -2.0 * zeta * omega_n]])
    b = np.array([[0.0], [omega_n**2]])
    c = np.array([[1.0, 0.0]])
    A = linalg.block_diag(*[a] * channels)
    B = linalg.block_diag(*[b] * channels)
    C = linalg.block_diag(*[c] * channels)
    return ReferenceModel(A, B, C, omega_n, zeta)


@dataclass(frozen=True)
class AdaptationMatrices:
    Ts: float
    P: np.ndarray
    sqrtP: np.ndarray
    D: np.ndarray
    Lam: np.ndarray
    Phi: np.ndarray
    expLam: np.ndarray      # exp(Lam A Lam^-1 Ts)
    embed: np.ndarray       # n x m, identity on the output block
    gain: np.ndarray        # Phi^-1 exp(Lam A Lam^-1 Ts) embed
    expA: np.ndarray        # exp(A Ts)
    GammaA: np.ndarray      # A^-1 (exp(A Ts) - I)
    expAneg: np.ndarray     # exp(-A Ts)


def _null_space_rows(M: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning {x : M x = 0}."""
    return linalg.null_space(M).T


def build_adaptation(model: ReferenceModel, Q=None, Ts: float = 0.1) -> AdaptationMatrices:
    if not Ts > 0:
        raise ValueError("Ts must be positive")
    A, C = model.A, model.C
    n, m = model.n, model.m
    Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
    if not np.allclose(Q, Q.T) or np.linalg.eigvalsh(Q).min() <= 0:
        raise ValueError("Q must be symmetric positive definite")
    P = linalg.solve_continuous_lyapunov(A.T, -Q)
    P = 0.5 * (P + P.T)
    w, V = np.linalg.eigh(P)
    if w.min() <= 0:
        raise IllConditioned("Lyapunov solution is not positive definite; is A_m Hurwitz?")
    sqrtP = (V * np.sqrt(w)) @ V.T
    D = _null_space_rows(C @ np.linalg.inv(sqrtP))  # D (C sqrtP^-1)^T = 0
    D = D.reshape(n - m, n)
    Lam = np.vstack([C, D @ sqrtP])
    if np.linalg.cond(Lam) > 1e12:
        raise IllConditioned("Lambda = [C_m; D sqrt(P)] is not invertible")
    Abar = Lam @ A @ np.linalg.inv(Lam)
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = Abar * Ts
    aug[:n, n:] = Lam * Ts
    E = linalg.expm(aug)
    expLam, Phi = E[:n, :n], E[:n, n:]
    embed = np.vstack([np.eye(m), np.zeros((n - m, m))])
    gain = np.linalg.solve(Phi, expLam @ embed)
    expA = linalg.expm(A * Ts)
    GammaA = np.linalg.solve(A, expA - np.eye(n))
    return AdaptationMatrices(Ts, P, sqrtP, D, Lam, Phi, expLam, embed, gain, expA, GammaA, linalg.expm(-A * Ts))


@dataclass(frozen=True)
class FilterRealization:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    omega_c: float
    zeta_c: float = 1.0

    def transfer(self, s: complex) -> np.ndarray:
        return self.C @ np.linalg.solve(s * np.eye(self.A.shape[0]) - self.A, self.B)

    def lowpass(self, s: complex) -> complex:
        """Scalar channel filter C(s) = wc^2 / (s^2 + 2 zeta_c wc s + wc^2)."""
        wc = self.omega_c
        return wc**2 / (s * s + 2 * self.zeta_c * wc * s + wc**2)


def lowpass_realization(omega_c: float, zeta_c: float = 1.0, channels: int = 2):
    a = np.array([[0.0, 1.0], [-omega_c**2, -2 * zeta_c * omega_c]])
    b = np.array([[0.0], [omega_c**2]])
    c = np.array([[1.0, 0.0]])
    return (linalg.block_diag(*[a] * channels), linalg.block_diag(*[b] * channels),
            linalg.block_diag(*[c] * channels))


def build_filter(model: ReferenceModel, omega_c: float, zeta_c: float = 1.0) -> FilterRealization:
    """Minimal realization of O(s) = C(s) M^-1(s) C_m (sI - A_m)^-1 per channel.

    With the companion-form channel, C_m adj(sI - A) = [s + 2 zeta wn, 1], the plant
    denominator cancels against M^-1 and each channel reduces to
    (wc^2 / wn^2) [s + 2 zeta wn, 1] / (s^2 + 2 zeta_c wc s + wc^2), realized here in
    observable canonical form.
    """
    if not omega_c > 0:
        raise ValueError("omega_c must be positive")
    wn, z = model.omega_n, model.zeta
    if np.max(np.linalg.eigvals(model.A).real) >= 0:
        raise NonMinimumPhase("reference model is not Hurwitz")
    k = omega_c**2 / wn**2
    a1, a0 = 2 * zeta_c * omega_c, omega_c**2
    Ao = np.array([[-a1, 1.0], [-a0, 0.0]])
    Bo = k * np.array([[1.0, 0.0], [2 * z * wn, 1.0]])
    Co = np.array([[1.0, 0.0]])
    ch = model.m
    A = linalg.block_diag(*[Ao] * ch)
    B = linalg.block_diag(*[Bo] * ch)
    C = linalg.block_diag(*[Co] * ch)
    if np.max(np.linalg.eigvals(A).real) >= 0:
        raise NonMinimumPhase("filter realization has unstable modes")
    ctrb = np.hstack([np.linalg.matrix_power(A, i) @ B for i in range(A.shape[0])])
    obsv = np.vstack([C @ np.linalg.matrix_power(A, i) for i in range(A.shape[0])])
    if np.linalg.matrix_rank(ctrb) < A.shape[0] or np.linalg.matrix_rank(obsv) < A.shape[0]:
        raise NonMinimumPhase("filter realization is not minimal")
    return FilterRealization(A, B, C, omega_c, zeta_c)


@dataclass(frozen=True)
class FilterDiscretization:
    expA: np.ndarray
    Gamma: np.ndarray


def discretize_filter(fr: FilterRealization, Ts: float) -> FilterDiscretization:
    n = fr.A.shape[0]
    E = linalg.expm(fr.A * Ts)
    return FilterDiscretization(E, np.linalg.solve(fr.A, E - np.eye(n)))


@dataclass
class L1State:
    x_hat: np.ndarray
    x_u: np.ndarray
    sigma: np.ndarray
    u_d: np.ndarray


def initial_state(model: ReferenceModel, fr: FilterRealization, y0) -> L1State:
    y0 = np.asarray(y0, dtype=float)
    return L1State(np.linalg.pinv(model.C) @ y0, np.zeros(fr.A.shape[0]), np.zeros(model.n), y0.copy())


def adaptation_step(am: AdaptationMatrices, y_hat, y) -> np.ndarray:
    """Piecewise-constant uncertainty estimate from the sampled prediction error."""
    return -am.gain @ (np.asarray(y_hat, dtype=float) - np.asarray(y, dtype=float))


def predictor_step(l1: L1State, am: AdaptationMatrices, model: ReferenceModel, u_d):
    """Exact ZOH update of the output predictor; returns (x_hat[i+1], y_hat[i+1])."""
    x_next = am.expA @ l1.x_hat + am.GammaA @ (model.B @ np.asarray(u_d, dtype=float) + l1.sigma)
    return x_next, model.C @ x_next


def control_step(l1: L1State, am: AdaptationMatrices, fr: FilterRealization, fd: FilterDiscretization,
                 model: ReferenceModel, u_ref, sigma):
    """Control output u_d[i] and the next filter state x_u[i+1]."""
    u_d = model.K_g @ np.asarray(u_ref, dtype=float) - fr.C @ l1.x_u
    x_u_next = fd.expA @ l1.x_u + fd.Gamma @ (fr.B @ (am.expAneg @ sigma))
    return u_d, x_u_next


@dataclass
class L1Controller:
    """Bundles the builders and advances the controller once per sample instant."""
    model: ReferenceModel
    am: AdaptationMatrices
    fr: FilterRealization
    fd: FilterDiscretization
    state: L1State = field(default=None)

    @classmethod
    def design(cls, omega_n=0.08, zeta=1.0, omega_c_ratio=1.5, Ts=0.1, Q=None, zeta_c=1.0):
        model = build_reference_model(omega_n, zeta)
        am = build_adaptation(model, Q, Ts)
        fr = build_filter(model, omega_c_ratio * omega_n, zeta_c)
        return cls(model, am, fr, discretize_filter(fr, Ts))

    def reset(self, y0) -> None:
        self.state = initial_state(self.model, self.fr, y0)

    def step(self, y, u_ref) -> np.ndarray:
        """Process sample i: estimate, compute the held output u_d[i], propagate."""
        st = self.state
        y_hat = self.model.C @ st.x_hat
        sigma = adaptation_step(self.am, y_hat, y)
        st.sigma = sigma
        u_d, x_u_next = control_step(st, self.am, self.fr, self.fd, self.model, u_ref, sigma)
        st.u_d = u_d
        x_hat_next, _ = predictor_step(st, self.am, self.model, u_d)
        st.x_hat = x_hat_next
        st.x_u = x_u_next
        return u_d

    def with_Ts(self, Ts: float) -> "L1Controller":
        am = build_adaptation(self.model, None, Ts)
        return replace(self, am=am, fd=discretize_filter(self.fr, Ts), state=None)
