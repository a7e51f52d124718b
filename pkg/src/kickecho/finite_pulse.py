"""Finite-duration standing-wave pulses on the momentum ladder.

A square pulse of depth V0 and duration tau_p evolves the fiber under
H = p^2/2m + sign*(V0/2)cos(kappa x), which is tridiagonal in the ladder
basis: diagonal kinetic rates (q+beta)^2 * 2*pi/T_T (angular frequency),
off-diagonal couplings sign*V0/(4*hbar).  Each sequence period is the pulse
followed by a free flight of period - tau_p.

Two fiber propagators are provided: adaptive symmetric splitting (sub-step
count doubled until the state stops changing, the reference contract) and
an exact tridiagonal eigendecomposition (the fast path used by scans; both
are validated against an independent position-grid split-step oracle, also
in this module).

In the short-pulse (Raman-Nath) limit the pulse acts as a delta kick of
strength phi_d = V0*tau_p/(2*hbar); the dimensionless depth
gamma = m*V0/(hbar*kappa)^2 controls how quickly kinetic motion during the
pulse destroys that picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from .errors import ConvergenceError, GridResolutionError, TruncationError
from .ladder import (
    EDGE_BAND,
    EDGE_TOL,
    NORM_TOL,
    LadderState,
    WavepacketSpec,
    _check_edges,
    _convolve_kick,
    auto_q_max,
    gaussian_beta_nodes,
    ground_state,
    kick_kernel,
)
from .params import HBAR, PhysicalParams, gamma_from_v0

# Adaptive-splitting contract: stop when the state changes by less than this
# under sub-step doubling; give up past MAX_SUBSTEPS.
SPLIT_TOL = 1e-9
MAX_SUBSTEPS = 2**16

# Position-grid oracle: time-step doubling tolerance (on the Richardson
# extrapolant of consecutive refinements), cap, and the norm/energy
# conservation gate.
ORACLE_STEP_TOL = 1e-9
ORACLE_MAX_STEPS = 2**18
ORACLE_DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class FinitePulseSpec:
    """One echo sequence built from square pulses.

    n_pulses pulses of depth v0 (J) and duration tau_p with standing-wave
    sign +1, then n_pulses with sign -1; every pulse is followed by a free
    flight of period - tau_p.  Acceleration is out of scope for finite
    pulses and must stay zero.
    """

    n_pulses: int
    v0: float
    tau_p: float
    period: float
    accel: float = 0.0

    def __post_init__(self):
        if self.n_pulses < 1 or int(self.n_pulses) != self.n_pulses:
            raise ValueError(f"n_pulses must be a positive integer, got {self.n_pulses!r}")
        if self.v0 < 0.0 or not math.isfinite(self.v0):
            raise ValueError(f"v0 must be >= 0 and finite, got {self.v0!r}")
        if not (self.period > 0.0):
            raise ValueError(f"period must be positive, got {self.period!r}")
        if not (0.0 <= self.tau_p <= self.period):
            raise ValueError(
                f"tau_p must satisfy 0 <= tau_p <= period, got {self.tau_p!r}"
            )
        if self.accel != 0.0:
            raise ValueError("finite-pulse sequences support zero acceleration only")

    @property
    def phi_d(self) -> float:
        """Equivalent delta-kick strength V0*tau_p/(2*hbar)."""
        return self.v0 * self.tau_p / (2.0 * HBAR)

    def gamma(self, params: PhysicalParams) -> float:
        return gamma_from_v0(self.v0, params)


def auto_q_max_finite(spec: FinitePulseSpec, params: PhysicalParams) -> int:
    """Ladder half-width for a finite-pulse sequence.

    Two upper estimates of the reachable momentum: the Raman-Nath ballistic
    spread n_pulses*phi_d (short pulses), and the energy bound
    sqrt(2*N*gamma) from |energy change per pulse| <= V0 (long pulses, where
    kinetic motion during the pulse suppresses momentum transfer).  The
    smaller estimate plus margin wins; the edge monitor still guards the
    result at runtime.
    """
    rn = auto_q_max(spec.n_pulses, spec.phi_d)
    gamma = spec.gamma(params)
    q_energy = math.sqrt(2.0 * spec.n_pulses * max(gamma, 0.0))
    en = int(math.ceil(q_energy + 16.0 + 3.0 * q_energy ** (1.0 / 3.0)))
    return min(rn, en)


def pulse_bands(
    spec: FinitePulseSpec, beta: float, q_max: int, sign: int, params: PhysicalParams
) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal pulse Hamiltonian in angular-frequency units (H/hbar).

    Returns (diagonal, off-diagonal): kinetic rates (q+beta)^2 * 2*pi/T_T
    and uniform couplings sign*v0/(4*hbar).
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    qs = np.arange(-q_max, q_max + 1)
    diag = (qs + beta) ** 2 * (2.0 * math.pi / params.talbot_time)
    off = np.full(2 * q_max, sign * spec.v0 / (4.0 * HBAR))
    return diag, off


def pulse_propagator(
    spec: FinitePulseSpec, beta: float, q_max: int, sign: int, params: PhysicalParams
) -> np.ndarray:
    """Dense unitary exp(-i*H*tau_p/hbar) via tridiagonal eigendecomposition."""
    diag, off = pulse_bands(spec, beta, q_max, sign, params)
    w, v = linalg.eigh_tridiagonal(diag, off)
    phases = np.exp(-1j * w * spec.tau_p)
    return (v * phases) @ v.T


def _strang_pulse(
    amps: np.ndarray,
    spec: FinitePulseSpec,
    beta: float,
    q_max: int,
    sign: int,
    params: PhysicalParams,
    n_sub: int,
) -> np.ndarray:
    """Symmetric splitting with n_sub sub-steps: (K/2) V (K V)^(n-1) (K/2),
    kinetic half-steps merged between consecutive sub-steps."""
    dt = spec.tau_p / n_sub
    qs = np.arange(-q_max, q_max + 1)
    rate = (qs + beta) ** 2 * (2.0 * math.pi / params.talbot_time)
    half_k = np.exp(-1j * rate * dt / 2.0)
    full_k = half_k * half_k
    kernel = kick_kernel(spec.v0 * dt / (2.0 * HBAR), sign)
    out = amps * half_k
    for step in range(n_sub):
        out = _convolve_kick(out, kernel)
        out = out * (half_k if step == n_sub - 1 else full_k)
    return out


def apply_finite_pulse(
    state: LadderState,
    spec: FinitePulseSpec,
    sign: int,
    params: PhysicalParams,
    method: str = "adaptive",
) -> LadderState:
    """One square pulse exp(-(i/hbar)(p^2/2m + sign*(V0/2)cos kappa x)*tau_p).

    method="adaptive": symmetric operator splitting, sub-step count doubled
    until the output changes by less than SPLIT_TOL in norm-distance
    (ConvergenceError past MAX_SUBSTEPS).  method="eig": exact tridiagonal
    eigendecomposition; the two agree to oracle accuracy and "eig" is the
    faster choice inside scans.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if spec.tau_p == 0.0:
        return LadderState(state.beta, state.q_max, state.amps.copy())
    if method == "eig":
        u = pulse_propagator(spec, state.beta, state.q_max, sign, params)
        out = u @ state.amps
    elif method == "adaptive":
        n_sub = 1
        out = _strang_pulse(state.amps, spec, state.beta, state.q_max, sign, params, n_sub)
        while True:
            if 2 * n_sub > MAX_SUBSTEPS:
                raise ConvergenceError(
                    f"pulse splitting not converged to {SPLIT_TOL:g} within "
                    f"{MAX_SUBSTEPS} sub-steps",
                    achieved=dist,
                )
            finer = _strang_pulse(
                state.amps, spec, state.beta, state.q_max, sign, params, 2 * n_sub
            )
            dist = float(np.linalg.norm(finer - out))
            out = finer
            if dist < SPLIT_TOL:
                break
            n_sub *= 2
    else:
        raise ValueError(f"unknown method {method!r}")
    _check_edges(out, state.q_max)
    return LadderState(state.beta, state.q_max, out)


def run_finite_sequence(
    spec: FinitePulseSpec,
    beta: float,
    params: PhysicalParams,
    q_max: int | None = None,
    method: str = "eig",
) -> tuple[LadderState, float]:
    """Full finite-pulse sequence from the q = 0 rung; returns (state, I).

    n_pulses periods of (pulse sign +1, free flight period - tau_p), then
    the same with sign -1.  I = |c_{q=0}|^2.
    """
    if q_max is None:
        q_max = auto_q_max_finite(spec, params)
    state = ground_state(beta, q_max)
    qs = state.q_values
    free_phase = np.exp(
        -2j * math.pi * ((spec.period - spec.tau_p) / params.talbot_time)
        * (qs + beta) ** 2
    )
    for sign in (+1, -1):
        if method == "eig" and spec.tau_p > 0.0:
            u = pulse_propagator(spec, beta, q_max, sign, params)
            amps = state.amps
            for _ in range(spec.n_pulses):
                amps = u @ amps
                _check_edges(amps, q_max)
                amps = amps * free_phase
            state = LadderState(beta, q_max, amps)
        else:
            for _ in range(spec.n_pulses):
                state = apply_finite_pulse(state, spec, sign, params, method)
                state = LadderState(beta, q_max, state.amps * free_phase)
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise TruncationError(
            f"norm drifted to {norm!r} over the finite-pulse sequence; ladder too narrow"
        )
    return state, state.population(0)


def finite_return_amplitudes(
    n_pulses: int,
    v0: float,
    tau_p: float,
    periods,
    betas,
    params: PhysicalParams,
    q_max: int | None = None,
) -> np.ndarray:
    """Vectorized return amplitudes c_{q=0} over broadcast (periods, betas).

    The pulse propagator is period-independent, so for each distinct beta
    the pulse is one dense matrix applied to all period columns at once;
    free-flight phases vary per column.  Amplitudes carry the complete
    fiber phase (nothing is gauged away), so they can be averaged
    coherently across fibers.
    """
    periods_b, betas_b = np.broadcast_arrays(
        np.atleast_1d(np.asarray(periods, dtype=float)),
        np.atleast_1d(np.asarray(betas, dtype=float)),
    )
    shape = periods_b.shape
    t = periods_b.ravel()
    bet = betas_b.ravel()
    if np.any(t <= 0.0) or tau_p < 0.0 or np.any(t < tau_p):
        raise ValueError("periods must be positive and no smaller than tau_p")
    out = np.empty(t.size, dtype=np.complex128)
    for beta in np.unique(bet):
        cols = np.nonzero(bet == beta)[0]
        spec = FinitePulseSpec(n_pulses, v0, tau_p, float(np.min(t[cols])))
        if q_max is None:
            qm = auto_q_max_finite(spec, params)
        else:
            qm = q_max
        qs = np.arange(-qm, qm + 1)
        amps = np.zeros((2 * qm + 1, cols.size), dtype=np.complex128)
        amps[qm, :] = 1.0
        free = np.exp(
            -2j * math.pi * ((t[cols] - tau_p) / params.talbot_time)[None, :]
            * ((qs + beta) ** 2)[:, None]
        )
        for sign in (+1, -1):
            u = (
                pulse_propagator(spec, beta, qm, sign, params)
                if tau_p > 0.0
                else None
            )
            for _ in range(n_pulses):
                if u is not None:
                    amps = u @ amps
                _check_edges(amps, qm)
                amps *= free
        norms = np.sum(np.abs(amps) ** 2, axis=0)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > NORM_TOL:
            raise TruncationError(
                f"norm drifted by {worst:.3e} in the batched finite-pulse run; "
                "ladder too narrow"
            )
        out[cols] = amps[qm, :]
    return out.reshape(shape)


def finite_outputs_batched(
    n_pulses: int,
    v0: float,
    tau_p: float,
    periods,
    betas,
    params: PhysicalParams,
    q_max: int | None = None,
) -> np.ndarray:
    """Vectorized outputs |c_{q=0}|^2 over broadcast (periods, betas)."""
    return (
        np.abs(
            finite_return_amplitudes(
                n_pulses, v0, tau_p, periods, betas, params, q_max
            )
        )
        ** 2
    )


def finite_gaussian_output(
    spec: FinitePulseSpec,
    wavepacket: WavepacketSpec,
    params: PhysicalParams,
    tol: float = 1e-4,
    max_nodes: int = 4097,
) -> float:
    """Return probability of a Gaussian wavepacket through a finite-pulse
    sequence: the squared coherent fiber-amplitude average, as in the
    delta-kick gaussian_output."""
    prev = None
    n = 33
    while n <= max_nodes:
        betas, weights = gaussian_beta_nodes(wavepacket, params, n)
        amps = finite_return_amplitudes(
            spec.n_pulses, spec.v0, spec.tau_p, spec.period, betas, params
        )
        val = float(np.abs(np.dot(weights, amps)) ** 2)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-12):
            return val
        prev = val
        n = 2 * n - 1
    raise ConvergenceError(
        f"fiber quadrature did not converge to {tol:g} within {max_nodes} nodes",
        achieved=abs(val - prev) / max(abs(val), 1e-12),
    )


# ---------------------------------------------------------------------------
# Position-grid split-step oracle (independent discretization).
# ---------------------------------------------------------------------------


def _pow2_at_least(need: float) -> int:
    n = 1
    while n < need:
        n *= 2
    return n


def _grid_energy(
    u: np.ndarray, cosg: np.ndarray, k_rate: np.ndarray, v0: float, sign: int
) -> float:
    """Mean energy/hbar of a grid state during a pulse (any normalization)."""
    w = float(np.sum(np.abs(u) ** 2))
    c2 = np.abs(np.fft.fft(u)) ** 2 / (u.size * w)
    kinetic = float(np.sum(c2 * k_rate))
    potential = sign * (v0 / (2.0 * HBAR)) * float(np.sum(np.abs(u) ** 2 * cosg)) / w
    return kinetic + potential


def _fft_pulse(
    u: np.ndarray, cosg: np.ndarray, k_rate: np.ndarray,
    v0: float, sign: int, tau_p: float, n_t: int,
) -> np.ndarray:
    """n_t symmetric split steps (V/2, K, V/2) of one pulse on a grid state."""
    dt = tau_p / n_t
    v_half = np.exp(-1j * sign * (v0 / (2.0 * HBAR)) * cosg * dt / 2.0)
    v_full = v_half * v_half
    k_full = np.exp(-1j * k_rate * dt)
    w = u * v_half
    for step in range(n_t):
        w = np.fft.ifft(np.fft.fft(w) * k_full)
        w = w * (v_half if step == n_t - 1 else v_full)
    return w


def _fft_pulse_converged(
    u: np.ndarray, cosg: np.ndarray, k_rate: np.ndarray,
    v0: float, sign: int, tau_p: float,
) -> np.ndarray:
    """One pulse with the split-step count doubled until the Richardson
    extrapolant of consecutive refinements is stationary to ORACLE_STEP_TOL,
    then checked for norm/energy drift.

    The symmetric splitting error is quadratic in the step size, so
    (4*u_{2n} - u_n)/3 cancels the leading term and the doubling loop
    terminates at far coarser stepping for the same accuracy.
    """
    if tau_p == 0.0:
        return u
    norm0 = float(np.sum(np.abs(u) ** 2))
    e0 = _grid_energy(u, cosg, k_rate, v0, sign)
    n_t = 8
    coarse = _fft_pulse(u, cosg, k_rate, v0, sign, tau_p, n_t)
    extrap = None
    while True:
        if 2 * n_t > ORACLE_MAX_STEPS:
            raise ConvergenceError(
                f"oracle time stepping not converged to {ORACLE_STEP_TOL:g} "
                f"within {ORACLE_MAX_STEPS} steps",
                achieved=dist,
            )
        fine = _fft_pulse(u, cosg, k_rate, v0, sign, tau_p, 2 * n_t)
        prev_extrap, extrap = extrap, (4.0 * fine - coarse) / 3.0
        if prev_extrap is None:
            dist = math.inf
        else:
            dist = float(np.linalg.norm(extrap - prev_extrap)) / math.sqrt(norm0)
            if dist < ORACLE_STEP_TOL:
                break
        coarse = fine
        n_t *= 2
    norm1 = float(np.sum(np.abs(extrap) ** 2))
    e1 = _grid_energy(extrap, cosg, k_rate, v0, sign)
    scale = max(abs(e0), v0 / HBAR)
    if (
        abs(norm1 - norm0) / norm0 > ORACLE_DRIFT_TOL
        or abs(e1 - e0) > ORACLE_DRIFT_TOL * scale
    ):
        raise GridResolutionError(
            f"norm/energy drift over one pulse exceeded {ORACLE_DRIFT_TOL:g} "
            f"(norm {abs(norm1 - norm0) / norm0:.3e}, "
            f"energy {abs(e1 - e0) / scale:.3e} relative)"
        )
    return extrap


def splitstep_fiber(
    spec: FinitePulseSpec,
    beta: float,
    params: PhysicalParams,
    n_x: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Position-grid split-step run of the full sequence on one fiber.

    One lattice period with Bloch phase beta: u(x) holds the periodic part,
    ladder amplitudes are its discrete Fourier coefficients, kinetic phases
    use k = (q+beta)*kappa.  Pulses are integrated by symmetric
    potential-kinetic-potential splitting with the step count doubled until
    the state stops changing; norm and energy conservation per pulse are
    enforced to ORACLE_DRIFT_TOL.

    Returns (q_values, final amplitudes); the output I is the squared
    magnitude at q = 0.
    """
    q_bound = auto_q_max_finite(spec, params)
    if n_x is None:
        n_x = _pow2_at_least(4 * (q_bound + 8))
    if n_x < 2 * q_bound:
        raise GridResolutionError(
            f"{n_x} grid points cannot resolve momenta out to q = {q_bound}"
        )
    qs = np.fft.fftfreq(n_x, d=1.0 / n_x)  # integer ladder indices, FFT order
    cosx = np.cos(2.0 * math.pi * np.arange(n_x) / n_x)  # cos(kappa x_j)
    k_rate = (qs + beta) ** 2 * (2.0 * math.pi / params.talbot_time)

    # c_q = delta_{q,0}: position values u_j = 1, so sum|u|^2 = n_x.
    u = np.ones(n_x, dtype=np.complex128)
    free_phase = np.exp(-1j * k_rate * (spec.period - spec.tau_p))

    for sign in (+1, -1):
        for _ in range(spec.n_pulses):
            u = _fft_pulse_converged(u, cosx, k_rate, spec.v0, sign, spec.tau_p)
            u = np.fft.ifft(np.fft.fft(u) * free_phase)

    c = np.fft.fft(u) / n_x
    c = c / math.sqrt(float(np.sum(np.abs(c) ** 2)))
    order = np.argsort(qs)
    return qs[order].astype(int), c[order]


def splitstep_output(
    spec: FinitePulseSpec, params: PhysicalParams, beta: float = 0.0,
    n_x: int | None = None,
) -> float:
    """Oracle output I = |c_{q=0}|^2 from splitstep_fiber."""
    qs, c = splitstep_fiber(spec, beta, params, n_x)
    return float(np.abs(c[np.nonzero(qs == 0)[0][0]]) ** 2)


# ---------------------------------------------------------------------------
# Wide-grid wavepacket runs (secondary cross-check at reduced sigma).
# ---------------------------------------------------------------------------


def _wavepacket_grid(
    wavepacket: WavepacketSpec,
    params: PhysicalParams,
    q_bound: int,
    n_periods: int | None,
    points_per_period: int | None,
):
    """Common setup for wide-grid runs: a periodic box of whole lattice
    periods holding the Gaussian, the grating cosine on it, and the free
    kinetic phase rate of its momentum lattice.

    The box must both contain the Gaussian in position (12 sigma) and
    sample its momentum density finely (several k-points per sigma_beta);
    that makes wide grids impractical for large sigma, which is why the
    fiber-quadrature path is the primary Gaussian evaluator.
    """
    sb = wavepacket.sigma_beta(params)
    lattice_period = 2.0 * math.pi / params.kappa
    if n_periods is None:
        n_periods = _pow2_at_least(
            max(16.0, 6.0 / sb, 12.0 * wavepacket.sigma_x / lattice_period)
        )
    if points_per_period is None:
        points_per_period = _pow2_at_least(4 * (q_bound + 8))
    n = n_periods * points_per_period
    x = np.arange(n) * (lattice_period / points_per_period)
    psi = np.exp(-((x - x[n // 2]) ** 2) / (4.0 * wavepacket.sigma_x**2)).astype(
        np.complex128
    )
    psi /= np.linalg.norm(psi)
    kfrac = np.fft.fftfreq(n) * (n / n_periods)  # k/kappa, FFT order
    cosg = np.cos(params.kappa * x)
    k_rate = kfrac**2 * (2.0 * math.pi / params.talbot_time)
    return psi, cosg, k_rate


def delta_wavepacket_grid_output(
    n_kicks: int,
    phi_d: float,
    period: float,
    wavepacket: WavepacketSpec,
    params: PhysicalParams,
    n_periods: int | None = None,
    points_per_period: int | None = None,
) -> float:
    """Delta-kick sequence on a wide position grid, returning the overlap
    probability |<psi_0|psi_final>|^2 with the initial packet.

    When the packet momentum density fits inside |k| < kappa/2, each
    k-point of the box is the q = 0 rung of its own fiber and the overlap
    equals the squared coherent fiber average computed by
    gaussian_output.  Kicks and free flights are exact on the grid (no
    splitting error), making this an independent oracle at small sigma.
    """
    psi, cosg, k_rate = _wavepacket_grid(
        wavepacket, params, auto_q_max(n_kicks, phi_d), n_periods, points_per_period
    )
    psi0 = psi.copy()
    free = np.exp(-1j * k_rate * period)
    for sign in (+1, -1):
        kick = np.exp(-1j * sign * phi_d * cosg)
        for _ in range(n_kicks):
            psi = np.fft.ifft(np.fft.fft(psi * kick) * free)
    return float(np.abs(np.vdot(psi0, psi)) ** 2)


def finite_wavepacket_grid_output(
    spec: FinitePulseSpec,
    wavepacket: WavepacketSpec,
    params: PhysicalParams,
    n_periods: int | None = None,
    points_per_period: int | None = None,
) -> float:
    """Finite-pulse sequence on a wide position grid (overlap probability
    |<psi_0|psi_final>|^2); cross-check of finite_gaussian_output at
    reduced sigma."""
    psi, cosg, k_rate = _wavepacket_grid(
        wavepacket, params, auto_q_max_finite(spec, params), n_periods,
        points_per_period,
    )
    psi0 = psi.copy()
    free = np.exp(-1j * k_rate * (spec.period - spec.tau_p))
    for sign in (+1, -1):
        for _ in range(spec.n_pulses):
            psi = _fft_pulse_converged(psi, cosg, k_rate, spec.v0, sign, spec.tau_p)
            psi = np.fft.ifft(np.fft.fft(psi) * free)
    return float(np.abs(np.vdot(psi0, psi)) ** 2)
