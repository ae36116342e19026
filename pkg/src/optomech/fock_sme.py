"""Continuous phonon-number monitoring in a truncated Fock space.

With quadratic coupling H_I = (hbar chi / 2)(a + a^dag) b^dag b and a fast
cavity (kappa >> chi), the intracavity field is slaved to the phonon number,
a ~ -i (chi / kappa) n, and homodyne detection of the phase quadrature
becomes a continuous measurement of n = b^dag b with strength

    Gamma_meas = chi^2 / kappa.

The reduced stochastic master equation for the mechanics is

    d rho = gamma (nth+1) D[b] rho dt + gamma nth D[b^dag] rho dt
            + Gamma_meas D[n] rho dt + sqrt(eta Gamma_meas) H[n] rho dW.

Times are in units of 1/gamma when ``gamma`` = 1 (the presets do this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm
from scipy.ndimage import median_filter

from .errors import CutoffOverflow, ParameterError
from .params import SystemParams

DEFAULT_OVERFLOW = 1e-4
NOISE_CHUNK = 1024
SCHEMES = ("kraus", "euler")


@dataclass(frozen=True)
class SMEParams:
    chi: float
    kappa: float
    gamma: float
    n_th: float
    efficiency: float = 1.0
    dim: int = 8
    dt: float | None = None
    seed: int = 0
    scheme: str = "kraus"
    overflow_threshold: float = DEFAULT_OVERFLOW

    def __post_init__(self):
        if self.chi < 0 or self.kappa <= 0 or self.gamma < 0 or self.n_th < 0:
            raise ParameterError("need chi >= 0, kappa > 0, gamma >= 0, n_th >= 0")
        if not 0 < self.efficiency <= 1:
            raise ParameterError("efficiency must lie in (0, 1]")
        if self.dim < 2:
            raise ParameterError("Fock cutoff dimension must be at least 2")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}")
        if self.dt is not None and not self.dt > 0:
            raise ParameterError("dt must be positive")

    @classmethod
    def from_rates(cls, measurement_rate: float, kappa: float, gamma: float, n_th: float, **kw) -> "SMEParams":
        """Build from the target chi^2 / kappa."""
        return cls(chi=math.sqrt(measurement_rate * kappa), kappa=kappa, gamma=gamma, n_th=n_th, **kw)

    @property
    def measurement_rate(self) -> float:
        return self.chi**2 / self.kappa

    @property
    def adiabatic_ratio(self) -> float:
        """chi / kappa; the reduction needs this to be small."""
        return self.chi / self.kappa

    @property
    def adiabatic(self) -> bool:
        return self.adiabatic_ratio < 0.3

    @property
    def stiffness(self) -> float:
        """Rate bound used to calibrate dt: kappa + gamma (nth + 1) d."""
        return self.kappa + self.gamma * (self.n_th + 1) * self.dim

    @property
    def time_step(self) -> float:
        if self.dt is not None:
            return self.dt
        # dt * (kappa + gamma (nth+1) d) = 0.05
        return 0.05 / self.stiffness

    def replace(self, **kw) -> "SMEParams":
        return replace(self, **kw)


def fast_measurement_ratio(p: SMEParams, n: int) -> float:
    """(chi^2/kappa) / (gamma [nth (n+1) + (nth+1) n]); jumps resolve when >> 1."""
    rate = p.gamma * (p.n_th * (n + 1) + (p.n_th + 1) * n)
    return math.inf if rate == 0 else p.measurement_rate / rate


# ------------------------------------------------------------------ states


@dataclass(frozen=True, eq=False)
class TruncatedState:
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        r = np.array(self.rho, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ParameterError("density matrix must be square")
        if np.max(np.abs(r - r.conj().T)) > 1e-10:
            raise ParameterError("density matrix must be Hermitian")
        if abs(np.trace(r).real - 1) > 1e-8:
            raise ParameterError("density matrix must have unit trace")
        if np.linalg.eigvalsh(r)[0] < -1e-8:
            raise ParameterError("density matrix must be positive semidefinite")
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def mean_phonon(self) -> float:
        return float(np.arange(self.dim) @ self.populations)

    @classmethod
    def fock(cls, n: int, dim: int) -> "TruncatedState":
        r = np.zeros((dim, dim), dtype=complex)
        r[n, n] = 1.0
        return cls(r)

    @classmethod
    def thermal(cls, n_bar: float, dim: int) -> "TruncatedState":
        k = np.arange(dim)
        p = (n_bar / (1 + n_bar)) ** k if n_bar > 0 else (k == 0).astype(float)
        return cls(np.diag(p / p.sum()).astype(complex))

    @classmethod
    def from_populations(cls, p) -> "TruncatedState":
        p = np.asarray(p, dtype=float)
        return cls(np.diag(p / p.sum()).astype(complex))


def lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def collapse_operators(p: SMEParams):
    """[(rate, L)] for the Lindblad part; the last entry is the measured n."""
    b = lowering(p.dim)
    return [
        (p.gamma * (p.n_th + 1), b),
        (p.gamma * p.n_th, b.conj().T),
        (p.measurement_rate, number(p.dim)),
    ]


def _dissipator(L, rho):
    LdL = L.conj().T @ L
    return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)


def lindblad_rhs(p: SMEParams, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for rate, L in collapse_operators(p):
        if rate:
            out += rate * _dissipator(L, rho)
    return out


def lindbladian(p: SMEParams) -> np.ndarray:
    """Superoperator on row-major vec(rho)."""
    d = p.dim
    eye = np.eye(d)
    Lsup = np.zeros((d * d, d * d), dtype=complex)
    for rate, L in collapse_operators(p):
        if not rate:
            continue
        LdL = L.conj().T @ L
        Lsup += rate * (np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T))
    return Lsup


def lindblad_propagate(p: SMEParams, rho0, times) -> np.ndarray:
    """Exact unconditional evolution exp(L t) rho0 at each time."""
    Lsup = lindbladian(p)
    r0 = np.asarray(rho0, dtype=complex).reshape(-1)
    d = p.dim
    return np.array([(expm(Lsup * t) @ r0).reshape(d, d) for t in times])


def _measurement_super(c, rho):
    cr = c @ rho
    val = np.trace(cr + cr.conj().T)
    return cr + cr.conj().T - val * rho


def sme_step(state: TruncatedState, p: SMEParams, dW: float) -> TruncatedState:
    """One step of the reduced SME driven by the Wiener increment ``dW``.

    ``scheme='euler'`` is the plain Euler-Maruyama update followed by trace
    renormalization.  ``scheme='kraus'`` (default) applies the same weak
    order-1 update written as a completely positive map
    rho -> M rho M^dag + sum_k L_k rho L_k^dag dt, which keeps rho positive
    at the step sizes needed for strong measurement.
    """
    dt = p.time_step
    rho = np.array(state.rho)
    rho = _step_matrix(rho, p, dt, dW)
    pop_top = rho[-1, -1].real
    if pop_top > p.overflow_threshold:
        raise CutoffOverflow(
            f"population {pop_top:.2e} in level {p.dim - 1} exceeds {p.overflow_threshold:.1e}",
            pop_top,
            state.t + dt,
        )
    rho = 0.5 * (rho + rho.conj().T)
    return TruncatedState(rho, state.t + dt)


def _step_matrix(rho, p: SMEParams, dt: float, dW: float) -> np.ndarray:
    ops = collapse_operators(p)
    G = p.measurement_rate
    c = math.sqrt(G) * number(p.dim)
    if p.scheme == "euler":
        new = rho + lindblad_rhs(p, rho) * dt
        if G:
            new = new + math.sqrt(p.efficiency) * _measurement_super(c, rho) * dW
        return new / np.trace(new).real
    eta = p.efficiency
    exp_c = np.trace(c @ rho).real
    dy = dW + 2 * math.sqrt(eta) * exp_c * dt
    K = np.zeros_like(rho)
    for rate, L in ops:
        if rate:
            K = K + rate * (L.conj().T @ L)
    d = p.dim
    M = np.eye(d) - 0.5 * K * dt + math.sqrt(eta) * c * dy + 0.5 * eta * (c @ c) * (dy * dy - dt)
    new = M @ rho @ M.conj().T
    for rate, L in ops[:2]:
        if rate:
            new = new + rate * dt * (L @ rho @ L.conj().T)
    if G and eta < 1:
        new = new + (1 - eta) * dt * (c @ rho @ c)
    return new / np.trace(new).real


# -------------------------------------------------------- diagonal ensemble


class _PopulationStepper:
    """Vectorized step for diagonal states.

    Diagonal states stay diagonal under this SME (every operator is either
    diagonal or a ladder operator), so only populations need tracking.
    """

    def __init__(self, p: SMEParams, dt: float):
        n = np.arange(p.dim, dtype=float)
        g_dn = p.gamma * (p.n_th + 1)
        g_up = p.gamma * p.n_th
        self.n = n
        self.dt = dt
        self.euler = p.scheme == "euler"
        self.G = p.measurement_rate
        self.eta = p.efficiency
        self.down = g_dn * n[1:] * dt
        self.up = g_up * n[1:] * dt
        self.loss = (g_dn * n + g_up * np.append(n[1:], 0.0)) * dt
        self.c = math.sqrt(self.G) * n
        self.se = math.sqrt(self.eta)
        # 1 - K dt / 2 for the Kraus operator
        self.m0 = 1 - 0.5 * (self.loss + self.G * n * n * dt)
        self.c2 = 0.5 * self.eta * self.c * self.c
        self.lost = (1 - self.eta) * dt * self.G * n * n

    def __call__(self, P: np.ndarray, dW: np.ndarray) -> np.ndarray:
        """Advance populations stored level-major, shape (d, ntraj)."""
        dt = self.dt
        mean_n = self.n @ P
        if self.euler:
            new = P * (1 - self.loss)[:, None]
            if self.G:
                new += 2 * math.sqrt(self.eta * self.G) * (self.n[:, None] - mean_n) * P * dW
        else:
            dy = dW + 2 * self.se * math.sqrt(self.G) * mean_n * dt
            M = np.outer(self.c, self.se * dy)
            M += np.outer(self.c2, dy * dy - dt)
            M += self.m0[:, None]
            new = M * M * P
            if self.G and self.eta < 1:
                new += self.lost[:, None] * P
        new[:-1] += self.down[:, None] * P[1:]
        new[1:] += self.up[:, None] * P[:-1]
        new *= 1.0 / new.sum(axis=0)
        return new


def _population_step(P, p: SMEParams, dt: float, dW: np.ndarray) -> np.ndarray:
    """One step for trajectory-major populations, shape (ntraj, d)."""
    return _PopulationStepper(p, dt)(np.ascontiguousarray(P.T), dW).T


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Trajectory output: times, Wiener increments, homodyne current and <n>."""

    t: np.ndarray
    dW: np.ndarray
    current: np.ndarray
    n_cond: np.ndarray
    level: np.ndarray = field(default=None)
    populations: np.ndarray | None = None
    params: SMEParams | None = None

    def plateau_fraction(self, tolerance: float = 0.25) -> float:
        return plateau_fraction(self.smoothed(), tolerance)

    def smoothed(self) -> np.ndarray:
        return median_smooth(self.n_cond, self.t, 10.0 / self.params.measurement_rate)

    def jumps(self):
        return detect_jumps(self.level, self.t)


class _NoiseStream:
    """Wiener increments, one column per step, each row from its own generator."""

    def __init__(self, rngs, scale: float, n_steps: int, substeps: int = 1):
        self.rngs = rngs
        self.scale = scale / math.sqrt(substeps)
        self.sub = substeps
        self.left = n_steps
        self.buf = np.empty((0, len(rngs)))
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.pos == self.buf.shape[0]:
            m = max(1, min(NOISE_CHUNK, self.left))
            cols = [r.standard_normal(m * self.sub).reshape(m, self.sub).sum(axis=1) for r in self.rngs]
            self.buf = self.scale * np.ascontiguousarray(np.array(cols).T)
            self.left -= m
            self.pos = 0
        out = self.buf[self.pos]
        self.pos += 1
        return out


def trajectory_seeds(seed: int, n: int) -> list:
    """Independent per-trajectory streams spawned from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def run_ensemble(
    p: SMEParams,
    t_final: float,
    initial: TruncatedState | np.ndarray,
    n_traj: int,
    record_every: int = 1,
    keep_populations: bool = False,
    measure: bool = True,
    noise_substeps: int = 1,
) -> list[MeasurementRecord]:
    """Integrate ``n_traj`` trajectories from a diagonal initial state.

    Each trajectory draws its noise from its own spawned generator, so a
    trajectory sees the same noise whatever ``n_traj`` is (results agree up
    to floating-point summation order).
    With ``measure=False`` the innovation is switched off and every
    trajectory follows the unconditional master equation.
    ``noise_substeps=k`` builds each increment from k finer ones, so a run at
    dt with k = 2 sees the same Brownian path as a run at dt/2 with k = 1.
    """
    rho0 = initial.rho if isinstance(initial, TruncatedState) else np.asarray(initial)
    if np.max(np.abs(rho0 - np.diag(np.diag(rho0)))) > 0:
        raise ParameterError("ensemble integrator requires a diagonal initial state")
    dt = p.time_step
    n_steps = int(round(t_final / dt))
    rngs = trajectory_seeds(p.seed, n_traj)
    P = np.tile(np.diag(rho0).real[:, None], (1, n_traj))
    n = np.arange(p.dim, dtype=float)
    G = p.measurement_rate
    sq = math.sqrt(dt)
    n_rec = n_steps // record_every + 1
    t_rec = np.arange(n_rec) * dt * record_every
    n_out = np.empty((n_traj, n_rec))
    dW_out = np.zeros((n_traj, n_rec))
    cur_out = np.zeros((n_traj, n_rec))
    pops = np.empty((n_traj, n_rec, p.dim)) if keep_populations else None
    n_out[:, 0] = n @ P
    if keep_populations:
        pops[:, 0] = P.T
    # unconditional runs drop the measurement back-action; D[n] leaves populations alone
    step = _PopulationStepper(p if measure else p.replace(chi=0.0), dt)
    stream = _NoiseStream(rngs, sq, n_steps if measure else 0, noise_substeps)
    dW_acc = np.zeros(n_traj)
    y_acc = np.zeros(n_traj)
    zeros = np.zeros(n_traj)
    amp = 2 * math.sqrt(p.efficiency * G)
    for k_rec in range(1, n_rec):
        dW_acc[:] = 0.0
        y_acc[:] = 0.0
        for _ in range(record_every):
            dW = stream.next() if measure else zeros
            y_acc += amp * (n @ P) * dt + dW
            P = step(P, dW)
            dW_acc += dW
        top = P[-1].max()
        if top > p.overflow_threshold:
            raise CutoffOverflow(
                f"population {top:.2e} in level {p.dim - 1} exceeds {p.overflow_threshold:.1e}",
                float(top),
                float(k_rec * record_every * dt),
            )
        n_out[:, k_rec] = n @ P
        dW_out[:, k_rec] = dW_acc
        cur_out[:, k_rec] = y_acc / (record_every * dt)
        if keep_populations:
            pops[:, k_rec] = P.T
    records = []
    for j in range(n_traj):
        sm = median_smooth(n_out[j], t_rec, 10.0 / G) if G > 0 else n_out[j]
        records.append(
            MeasurementRecord(
                t=t_rec,
                dW=dW_out[j],
                current=cur_out[j],
                n_cond=n_out[j],
                level=np.rint(sm).astype(int),
                populations=None if pops is None else pops[j],
                params=p,
            )
        )
    return records


def run_trajectory(p: SMEParams, t_final: float, initial: TruncatedState, record_every: int = 1) -> MeasurementRecord:
    """Single conditional trajectory.

    Diagonal initial states use the population integrator; general states
    are stepped as full density matrices with ``sme_step``.
    """
    rho0 = initial.rho
    if np.max(np.abs(rho0 - np.diag(np.diag(rho0)))) == 0:
        return run_ensemble(p, t_final, initial, 1, record_every)[0]
    dt = p.time_step
    n_steps = int(round(t_final / dt))
    rng = trajectory_seeds(p.seed, 1)[0]
    state = initial
    nop = np.arange(p.dim)
    ts, ns, dws, cur = [0.0], [state.mean_phonon], [0.0], [0.0]
    acc_w = acc_y = 0.0
    G = p.measurement_rate
    for k in range(1, n_steps + 1):
        dW = rng.standard_normal() * math.sqrt(dt)
        acc_y += 2 * math.sqrt(p.efficiency * G) * state.mean_phonon * dt + dW
        acc_w += dW
        state = sme_step(state, p, dW)
        if k % record_every == 0:
            ts.append(k * dt)
            ns.append(float(nop @ state.populations))
            dws.append(acc_w)
            cur.append(acc_y / (record_every * dt))
            acc_w = acc_y = 0.0
    t = np.array(ts)
    n_arr = np.array(ns)
    sm = median_smooth(n_arr, t, 10.0 / G) if G > 0 else n_arr
    return MeasurementRecord(t, np.array(dws), np.array(cur), n_arr, np.rint(sm).astype(int), params=p)


# ------------------------------------------------------------ jump analysis


def median_smooth(x, t, window: float) -> np.ndarray:
    """Moving median over a time window (odd number of samples, at least 1)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return x.copy()
    dt = float(t[1] - t[0])
    k = max(1, int(round(window / dt)))
    if k % 2 == 0:
        k += 1
    k = min(k, x.size if x.size % 2 else x.size - 1)
    return median_filter(x, size=k, mode="nearest")


def plateau_fraction(x, tolerance: float = 0.25) -> float:
    """Fraction of samples within ``tolerance`` of an integer."""
    x = np.asarray(x, dtype=float)
    return float(np.mean(np.abs(x - np.rint(x)) <= tolerance))


def detect_jumps(level, t):
    """(time, from, to) for every change of the quantized level."""
    level = np.asarray(level)
    idx = np.nonzero(np.diff(level))[0] + 1
    return [(float(t[i]), int(level[i - 1]), int(level[i])) for i in idx]


def ensemble_statistics(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t, mean <n>, standard error) across trajectories."""
    n = np.array([r.n_cond for r in records])
    se = n.std(axis=0, ddof=1) / math.sqrt(n.shape[0]) if n.shape[0] > 1 else np.zeros(n.shape[1])
    return records[0].t, n.mean(axis=0), se


# ----------------------------------------------------- two-mode validation


def two_mode_lindbladian(chi: float, kappa: float, gamma: float, n_th: float, d_mech: int, d_cav: int) -> np.ndarray:
    """Full cavity + mechanics Lindbladian for H = (chi/2)(a + a^dag) n.

    Used only to validate the adiabatic reduction at small cutoffs.
    """
    a = np.kron(lowering(d_cav), np.eye(d_mech))
    b = np.kron(np.eye(d_cav), lowering(d_mech))
    nb = b.conj().T @ b
    H = 0.5 * chi * (a + a.conj().T) @ nb
    D = d_cav * d_mech
    eye = np.eye(D)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for rate, op in ((kappa, a), (gamma * (n_th + 1), b), (gamma * n_th, b.conj().T)):
        if rate:
            OdO = op.conj().T @ op
            L += rate * (np.kron(op, op.conj()) - 0.5 * np.kron(OdO, eye) - 0.5 * np.kron(eye, OdO.T))
    return L


def mechanical_coherence_decay(chi: float, kappa: float, t: float, d_cav: int = 6) -> float:
    """|rho_01(t)| / |rho_01(0)| of the mechanics under the full two-mode model."""
    d_m = 2
    L = two_mode_lindbladian(chi, kappa, 0.0, 0.0, d_m, d_cav)
    psi_m = np.array([1.0, 1.0]) / math.sqrt(2)
    psi_c = np.zeros(d_cav)
    psi_c[0] = 1.0
    psi = np.kron(psi_c, psi_m)
    rho = np.outer(psi, psi).astype(complex).reshape(-1)
    rt = (expm(L * t) @ rho).reshape(d_cav * d_m, d_cav * d_m)
    red = np.einsum("cicj->ij", rt.reshape(d_cav, d_m, d_cav, d_m))
    return float(abs(red[0, 1]) / 0.5)


# ---------------------------------------------------- displacement readout


@dataclass(frozen=True)
class ReadoutGain:
    gain: complex
    noise_factor: complex
    phase: float
    adiabatic: bool


def displacement_readout_gain(p: SystemParams) -> ReadoutGain:
    """Adiabatic q -> a_out transfer for linear (displacement) coupling.

    a_out = i g sqrt(k) e^{-i phi} / sqrt(Delta^2 + k^2/4) q + e^{-2 i phi} a_in,
    tan phi = 2 Delta / k, with k = 2 * cavity_decay the cavity energy decay
    rate.  The modulus is largest on resonance.
    """
    k = 2.0 * p.cavity_decay
    g = p.linearized_coupling
    delta = p.detuning
    phi = math.atan2(2.0 * delta, k)
    gain = 1j * g * math.sqrt(k) * np.exp(-1j * phi) / math.sqrt(delta**2 + k**2 / 4)
    # reflected input from the slaved field: k / (i Delta + k/2) - 1
    noise = k / (1j * delta + k / 2) - 1
    return ReadoutGain(complex(gain), complex(noise), phi, bool(k > 10 * p.mech_freq))
