"""Ensemble integrators for the coupled multiplicative-noise wealth SDE.

The simulated system is the rescaled Ito form

    dw_i = sqrt(2) sigma w_i dB_i + f_i(w) dt

where the drift f depends on the chosen dynamics: pairwise exchange on a
network (f_i = (J/n) sum_j (w_j - w_i) over neighbors), its mean-field
limit (f_i = J (wbar - w_i)), or the decoupled effective-field form
(f_i = J (theta w_i**(1-gamma) - w_i)).  Rescaling removes the secular
exp(sigma^2 t) growth of the raw wealth, which :func:`to_unscaled`
restores.

Two strong integrators are provided: Milstein (order 1.0) and the order
1.5 strong Taylor scheme for diagonal multiplicative noise, the latter
using analytic drift Jacobian contractions supplied by the dynamics.

Noise is counter-based: the Gaussian increments of step k come from a
Philox stream keyed by the run seed with the step index in the counter,
so a simulation is a pure function of its config no matter how the work
is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .distributions import theta_of_gamma
from .errors import PositivityError
from .topology import COMPLETE, NetworkTopology

MILSTEIN = "milstein"
TAYLOR15 = "taylor15"
SCHEMES = (MILSTEIN, TAYLOR15)

INIT_ONES = "ones"
INIT_GAUSSIAN = "gaussian"
DEFAULT_GAUSSIAN_INIT_SD = 0.05

# Philox counter lanes (word 2); word 3 carries the step index
_NOISE_LANE = 0
_INIT_LANE = 1


@dataclass(frozen=True)
class ModelParams:
    """Noise amplitude sigma (per sqrt(time)) and coupling strength J (per time)."""

    sigma: float
    J: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.J < 0:
            raise ValueError(f"J must be nonnegative, got {self.J}")

    @property
    def sigma2(self) -> float:
        return self.sigma * self.sigma

    @classmethod
    def from_sigma2(cls, sigma2: float, J: float) -> "ModelParams":
        return cls(sigma=math.sqrt(sigma2), J=J)


@dataclass(frozen=True)
class WealthState:
    """The wealth vector at one instant.  All entries must stay positive."""

    t: float
    w: np.ndarray

    def __post_init__(self):
        self.w.setflags(write=False)

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def mean_w(self) -> float:
        return float(self.w.mean())


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of the wealth vector at a requested time."""

    t: float
    w: np.ndarray

    def __post_init__(self):
        self.w.setflags(write=False)


@dataclass(frozen=True)
class NoiseIncrement:
    """Wiener increments for one step.

    dB has variance dt per agent.  dZ, needed only by the order-1.5
    scheme, is the time integral of the Brownian bridge over the step:
    Var(dZ) = dt^3/3 and Cov(dB, dZ) = dt^2/2.
    """

    dB: np.ndarray
    dZ: np.ndarray | None = None


def step_noise(seed: int, step: int, n: int, dt: float,
               with_dz: bool = False) -> NoiseIncrement:
    """Counter-based Gaussian increments for one step of n agents.

    A fresh Philox generator is built at counter (lane 0, step), so the
    stream is a pure function of (seed, step) and the dB values are
    identical whether or not dZ is requested.
    """
    gen = np.random.Generator(np.random.Philox(
        counter=[0, 0, _NOISE_LANE, step], key=np.uint64(seed)))
    if with_dz:
        z = gen.standard_normal((2, n))
        db = math.sqrt(dt) * z[0]
        dz = 0.5 * dt ** 1.5 * (z[0] + z[1] / math.sqrt(3.0))
        return NoiseIncrement(dB=db, dZ=dz)
    return NoiseIncrement(dB=math.sqrt(dt) * gen.standard_normal(n))


def interaction_drift(w: np.ndarray, topology: NetworkTopology,
                      J: float) -> np.ndarray:
    """Pairwise exchange drift f_i = (J/n) sum over neighbors of (w_j - w_i).

    Isolated agents get zero drift.  The coupling matrix is symmetric,
    so the drift sums to zero over the ensemble.
    """
    w = np.asarray(w, dtype=float)
    if w.size != topology.N:
        raise ValueError(
            f"state size {w.size} does not match topology N={topology.N}")
    if not topology.n_divisor > 0:
        raise ValueError("topology has n_divisor = 0; no coupling defined")
    if topology.kind == COMPLETE:
        # (J/N) * (sum_j w_j - N w_i), algebraically the neighbor sum
        return (J / topology.n_divisor) * (w.sum() - topology.N * w)
    deg = topology.degrees
    row = np.repeat(np.arange(topology.N), deg)
    neighbor_sum = np.bincount(row, weights=w[topology.indices],
                               minlength=topology.N)
    return (J / topology.n_divisor) * (neighbor_sum - deg * w)


def mf_drift(w: np.ndarray, J: float) -> np.ndarray:
    """Mean-field drift f_i = J (wbar - w_i) with wbar the ensemble mean."""
    w = np.asarray(w, dtype=float)
    if w.size == 0:
        raise ValueError("empty state")
    return J * (w.mean() - w)


def eft_drift(w: np.ndarray, J: float, gamma_eft: float,
              theta: float) -> np.ndarray:
    """Effective-field drift f_i = J (theta w_i**(1-gamma) - w_i).

    Replaces the local neighbor average by theta * w**(1-gamma), which
    decouples the agents.
    """
    if not 0 < gamma_eft <= 1:
        raise ValueError(f"gamma_eft must lie in (0, 1], got {gamma_eft}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("fractional power drift needs positive wealth")
    return J * (theta * w ** (1.0 - gamma_eft) - w)


class NetworkDynamics:
    """Pairwise exchange on a fixed topology.

    Caches a sparse adjacency operator so the neighbor sums (and the
    Jacobian contractions of the order-1.5 scheme, which reuse the same
    linear operator) cost one sparse matvec each.
    """

    kind = "network"

    def __init__(self, topology: NetworkTopology):
        self.topology = topology
        self._deg = topology.degrees.astype(float)
        if topology.kind == COMPLETE:
            self._adj = None
        else:
            n = topology.N
            self._adj = sp.csr_matrix(
                (np.ones(topology.indices.size), topology.indices,
                 topology.indptr), shape=(n, n))

    def _apply(self, v: np.ndarray, J: float) -> np.ndarray:
        top = self.topology
        if self._adj is None:
            return (J / top.n_divisor) * (v.sum() - top.N * v)
        return (J / top.n_divisor) * (self._adj @ v - self._deg * v)

    def drift(self, w: np.ndarray, params: ModelParams) -> np.ndarray:
        return self._apply(w, params.J)

    def jacobian_apply(self, w, v, params: ModelParams) -> np.ndarray:
        # the drift is linear: its Jacobian is the coupling operator itself
        return self._apply(v, params.J)

    def l0_drift(self, w, f, params: ModelParams) -> np.ndarray:
        # generator applied to a linear drift: second derivatives vanish
        return self._apply(f, params.J)


class MeanFieldDynamics:
    """Fully-connected limit: every agent couples to the ensemble mean."""

    kind = "meanfield"

    def drift(self, w, params: ModelParams) -> np.ndarray:
        return mf_drift(w, params.J)

    def jacobian_apply(self, w, v, params: ModelParams) -> np.ndarray:
        return params.J * (v.mean() - v)

    def l0_drift(self, w, f, params: ModelParams) -> np.ndarray:
        return params.J * (f.mean() - f)


class EFTDynamics:
    """Decoupled effective-field dynamics with exponent gamma_eft.

    ``theta`` defaults to the unit-mean normalizer for the given model
    parameters and is resolved lazily on first use.
    """

    kind = "eft"

    def __init__(self, gamma_eft: float, theta: float | None = None):
        if not 0 < gamma_eft <= 1:
            raise ValueError(f"gamma_eft must lie in (0, 1], got {gamma_eft}")
        self.gamma_eft = gamma_eft
        self.theta = theta
        self._theta_params = None

    def _theta(self, params: ModelParams) -> float:
        if self.theta is not None:
            return self.theta
        if self._theta_params is None or self._theta_params[0] != params:
            self._theta_params = (
                params, theta_of_gamma(params.J, params.sigma2, self.gamma_eft))
        return self._theta_params[1]

    def drift(self, w, params: ModelParams) -> np.ndarray:
        return eft_drift(w, params.J, self.gamma_eft, self._theta(params))

    def jacobian_apply(self, w, v, params: ModelParams) -> np.ndarray:
        g = self.gamma_eft
        fp = params.J * ((1.0 - g) * self._theta(params) * w ** (-g) - 1.0)
        return fp * v

    def l0_drift(self, w, f, params: ModelParams) -> np.ndarray:
        g = self.gamma_eft
        th = self._theta(params)
        fp = params.J * ((1.0 - g) * th * w ** (-g) - 1.0)
        fpp = -params.J * (1.0 - g) * g * th * w ** (-g - 1.0)
        return f * fp + params.sigma2 * w * w * fpp


def milstein_step(state: WealthState, drift: np.ndarray, sigma: float,
                  dt: float, noise: NoiseIncrement) -> WealthState:
    """One Milstein step: Euler-Maruyama plus sigma^2 w (dB^2 - dt)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    w = state.w
    db = noise.dB
    if db.size != w.size:
        raise ValueError("noise dimension does not match state")
    w_new = (w + drift * dt + math.sqrt(2.0) * sigma * w * db
             + sigma * sigma * w * (db * db - dt))
    _check_positive_state(w_new, state.t + dt)
    return WealthState(t=state.t + dt, w=w_new)


def taylor15_step(state: WealthState, dynamics, params: ModelParams,
                  dt: float, noise: NoiseIncrement) -> WealthState:
    """One step of the order-1.5 strong Taylor scheme for diagonal noise
    g_i = sqrt(2) sigma w_i.

    On top of the Milstein update this adds the mixed Brownian-time
    terms, using the drift Jacobian and generator contractions supplied
    analytically by the dynamics.  Requires the auxiliary increment dZ.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if noise.dZ is None:
        raise ValueError("order-1.5 scheme needs the auxiliary dZ increment")
    w = state.w
    db, dz = noise.dB, noise.dZ
    if db.size != w.size:
        raise ValueError("noise dimension does not match state")
    sig = params.sigma
    sq2sig = math.sqrt(2.0) * sig
    f = dynamics.drift(w, params)
    w_new = (
        w + f * dt + sq2sig * w * db + sig * sig * w * (db * db - dt)
        + sq2sig * dynamics.jacobian_apply(w, w * dz, params)
        + 0.5 * dynamics.l0_drift(w, f, params) * dt * dt
        + sq2sig * f * (db * dt - dz)
        + math.sqrt(2.0) * sig ** 3 * w * (db * db / 3.0 - dt) * db
    )
    _check_positive_state(w_new, state.t + dt)
    return WealthState(t=state.t + dt, w=w_new)


def _check_positive_state(w: np.ndarray, t: float) -> None:
    if np.any(w <= 0):
        raise PositivityError(agent=int(np.argmax(w <= 0)), t=t)


def to_unscaled(w: np.ndarray, sigma: float, t: float) -> np.ndarray:
    """Undo the mean-growth rescaling: W_i = w_i exp(sigma^2 t)."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return np.asarray(w, dtype=float) * math.exp(sigma * sigma * t)


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one ensemble run."""

    params: ModelParams
    dynamics: object  # NetworkDynamics | MeanFieldDynamics | EFTDynamics
    scheme: str
    N: int
    dt: float
    t_end: float
    snapshot_times: tuple
    init: str = INIT_ONES
    init_sd: float = DEFAULT_GAUSSIAN_INIT_SD
    seed: int = 0

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if abs(self.n_steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(
                f"t_end={self.t_end} is not a multiple of dt={self.dt}")
        if self.init not in (INIT_ONES, INIT_GAUSSIAN):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == INIT_GAUSSIAN and not 0 < self.init_sd:
            raise ValueError(f"init_sd must be positive, got {self.init_sd}")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_end + 1e-9:
                raise ValueError(
                    f"snapshot time {t} outside [0, t_end={self.t_end}]")
        if isinstance(self.dynamics, NetworkDynamics):
            top = self.dynamics.topology
            if top.N != self.N:
                raise ValueError(
                    f"topology N={top.N} does not match config N={self.N}")
            if not top.n_divisor > 0:
                raise ValueError(
                    "topology n_divisor must be positive for network dynamics")
        self.snapshot_steps()  # grid alignment

    def snapshot_steps(self) -> list:
        """Map each snapshot time onto the dt grid; reject misaligned times."""
        out = []
        for t in self.snapshot_times:
            k = int(round(t / self.dt))
            if abs(k * self.dt - t) > 1e-9 * max(1.0, abs(t)):
                raise ValueError(
                    f"snapshot time {t} is not a multiple of dt={self.dt}")
            out.append(k)
        return out

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def initial_state(config: SimConfig) -> WealthState:
    """Initial wealth vector: all ones, or a narrow Gaussian around one
    (resampled until positive), drawn from a dedicated Philox lane."""
    if config.init == INIT_ONES:
        return WealthState(t=0.0, w=np.ones(config.N))
    gen = np.random.Generator(np.random.Philox(
        counter=[0, 0, _INIT_LANE, 0], key=np.uint64(config.seed)))
    w = 1.0 + config.init_sd * gen.standard_normal(config.N)
    while np.any(w <= 0):
        bad = w <= 0
        w[bad] = 1.0 + config.init_sd * gen.standard_normal(int(bad.sum()))
    return WealthState(t=0.0, w=w)


def simulate(config: SimConfig) -> list:
    """Integrate the configured ensemble, returning snapshots at the
    requested times.  Deterministic in the config, including the seed.

    On a positivity violation the raised :class:`PositivityError` carries
    the snapshots emitted so far and the failing step index.
    """
    config.validate()
    snap_steps = config.snapshot_steps()
    wanted = {}
    for k, t in zip(snap_steps, config.snapshot_times):
        wanted.setdefault(k, []).append(t)

    state = initial_state(config)
    snapshots = []
    if 0 in wanted:
        for t in wanted[0]:
            snapshots.append(Snapshot(t=t, w=state.w.copy()))

    params = config.params
    dyn = config.dynamics
    with_dz = config.scheme == TAYLOR15
    for k in range(config.n_steps):
        noise = step_noise(config.seed, k, config.N, config.dt, with_dz=with_dz)
        try:
            if config.scheme == MILSTEIN:
                f = dyn.drift(state.w, params)
                state = milstein_step(state, f, params.sigma, config.dt, noise)
            else:
                state = taylor15_step(state, dyn, params, config.dt, noise)
        except PositivityError as err:
            err.step = k
            err.snapshots = snapshots
            raise
        if k + 1 in wanted:
            for t in wanted[k + 1]:
                snapshots.append(Snapshot(t=t, w=state.w.copy()))
    return snapshots


def strong_convergence_study(scheme: str, dts, n_paths: int, seed: int,
                             sigma: float = math.sqrt(0.05),
                             t_end: float = 1.0) -> dict:
    """Strong-error slope of a scheme against the exact uncoupled solution.

    With J = 0 each path is a geometric Brownian motion with the exact
    solution w_t = w_0 exp(sqrt(2) sigma B_t - sigma^2 t).  All step
    sizes are driven by one shared Brownian path per sample, generated at
    the finest level and aggregated exactly (dZ of a coarse step is the
    sum of fine dZ plus the time integral of the accumulated fine dB).
    Returns the mean absolute endpoint errors and the fitted log-log slope.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    dts = sorted(float(d) for d in dts)
    if not dts or dts[0] <= 0:
        raise ValueError("need positive step sizes")
    dt_fine = dts[0]
    m_fine = int(round(t_end / dt_fine))
    if abs(m_fine * dt_fine - t_end) > 1e-12:
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt_fine}")
    for d in dts:
        m = d / dt_fine
        if abs(m - round(m)) > 1e-9 or m_fine % int(round(m)):
            raise ValueError(
                f"dt={d} must evenly subdivide t_end and the finest dt")

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 3]))
    z = rng.standard_normal((2, m_fine, n_paths))
    db_fine = math.sqrt(dt_fine) * z[0]
    dz_fine = 0.5 * dt_fine ** 1.5 * (z[0] + z[1] / math.sqrt(3.0))

    b_total = db_fine.sum(axis=0)
    w_exact = np.exp(math.sqrt(2.0) * sigma * b_total - sigma * sigma * t_end)

    params = ModelParams(sigma=sigma, J=0.0)
    dyn = MeanFieldDynamics()
    errors = []
    for d in dts:
        m = int(round(d / dt_fine))
        k_steps = m_fine // m
        db_blk = db_fine.reshape(k_steps, m, n_paths)
        dz_blk = dz_fine.reshape(k_steps, m, n_paths)
        db = db_blk.sum(axis=1)
        # integral of accumulated within-block dB over the block
        prefix = np.cumsum(db_blk, axis=1) - db_blk
        dz = dz_blk.sum(axis=1) + dt_fine * prefix.sum(axis=1)
        state = WealthState(t=0.0, w=np.ones(n_paths))
        for k in range(k_steps):
            noise = NoiseIncrement(dB=db[k], dZ=dz[k])
            if scheme == MILSTEIN:
                f = dyn.drift(state.w, params)
                state = milstein_step(state, f, sigma, d, noise)
            else:
                state = taylor15_step(state, dyn, params, d, noise)
        errors.append(float(np.mean(np.abs(state.w - w_exact))))

    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return {"scheme": scheme, "dts": list(dts), "strong_errors": errors,
            "fitted_slope": slope}
