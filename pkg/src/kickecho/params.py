"""Physical constants and derived beam/atom parameters.

Everything is SI.  The geometry is a retro-reflected standing wave: a laser
with wavevector k_L produces a potential with spatial period lambda/2, so the
grating vector seen by the atoms is kappa = 2*k_L.  The natural clock of the
problem is the Talbot time T_T = 2*pi/(4*omega_r) at which free evolution
phases of the momentum ladder are all multiples of 2*pi.

Defaults target rubidium-85 addressed at 780 nm, but the mass and wavelength
are plain arguments everywhere so other species drop in without edits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s (CODATA 2018)
ATOMIC_MASS_KG = 1.66053906660e-27  # kg per unified atomic mass unit
RB85_MASS_U = 84.911789738  # Rb-85 relative atomic mass, in u
DEFAULT_WAVELENGTH = 780.0e-9  # m, Rb D2 line

# Tolerance for the internal consistency identity hbar*kappa^2*T_T/(2m) = 2*pi.
_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Derived single-atom parameters for one beam/species combination.

    Attributes
    ----------
    mass : float
        Atomic mass in kg.
    wavelength : float
        Laser wavelength in m.
    k_laser : float
        Laser wavevector 2*pi/wavelength, 1/m.
    kappa : float
        Grating wavevector 2*k_laser, 1/m.  One ladder rung is hbar*kappa.
    omega_r : float
        Recoil angular frequency hbar*k_laser**2/(2*mass), rad/s.
    talbot_time : float
        T_T = 2*pi/(4*omega_r), s.
    """

    mass: float
    wavelength: float
    k_laser: float
    kappa: float
    omega_r: float
    talbot_time: float

    @property
    def recoil_momentum(self) -> float:
        """One ladder spacing hbar*kappa, kg m/s."""
        return HBAR * self.kappa

    @property
    def ladder_phase_rate(self) -> float:
        """hbar*kappa^2/(2*mass) in rad/s: free phase per unit (q+beta)^2.

        Equals 2*pi/talbot_time by construction.
        """
        return HBAR * self.kappa**2 / (2.0 * self.mass)


def derive_params(mass: float, wavelength: float) -> PhysicalParams:
    """Build PhysicalParams from an atomic mass (kg) and wavelength (m).

    Raises ValueError for non-positive inputs.  The returned object satisfies
    hbar*kappa^2*talbot_time/(2*mass) = 2*pi to 1e-12 relative.
    """
    if not (mass > 0.0) or not math.isfinite(mass):
        raise ValueError(f"mass must be positive and finite, got {mass!r}")
    if not (wavelength > 0.0) or not math.isfinite(wavelength):
        raise ValueError(f"wavelength must be positive and finite, got {wavelength!r}")
    k_laser = 2.0 * math.pi / wavelength
    kappa = 2.0 * k_laser
    omega_r = HBAR * k_laser**2 / (2.0 * mass)
    talbot_time = 2.0 * math.pi / (4.0 * omega_r)
    p = PhysicalParams(mass, wavelength, k_laser, kappa, omega_r, talbot_time)
    ident = HBAR * kappa**2 * talbot_time / (2.0 * mass) / (2.0 * math.pi)
    if abs(ident - 1.0) > _IDENTITY_TOL:
        raise AssertionError(f"Talbot identity violated: {ident!r}")
    return p


def rb85_params(
    wavelength: float = DEFAULT_WAVELENGTH, mass_u: float = RB85_MASS_U
) -> PhysicalParams:
    """Parameters for Rb-85 (or an override mass in u) at the given wavelength."""
    return derive_params(mass_u * ATOMIC_MASS_KG, wavelength)


@dataclass(frozen=True)
class KickStrength:
    """Strength of one standing-wave pulse.

    phi_d is the dimensionless kick phase that enters exp(-i*phi_d*cos(kappa x)).
    For a square pulse of depth V0 over duration tau_p, phi_d = V0*tau_p/(2*hbar).
    V0, tau_p and the dimensionless depth gamma = mass*V0/(hbar*kappa)^2 are
    carried along when known; a bare phi_d leaves them None.
    """

    phi_d: float
    v0: float | None = None
    tau_p: float | None = None
    gamma: float | None = None


def kick_strength_from_pulse(
    v0: float, tau_p: float, params: PhysicalParams
) -> KickStrength:
    """KickStrength for a square pulse of depth v0 (J) and duration tau_p (s).

    tau_p = 0 is allowed and gives phi_d = 0 (useful as a degenerate limit);
    non-positive depths and negative durations are rejected.
    """
    if v0 <= 0.0 or not math.isfinite(v0):
        raise ValueError(f"v0 must be positive and finite, got {v0!r}")
    if tau_p < 0.0 or not math.isfinite(tau_p):
        raise ValueError(f"tau_p must be >= 0 and finite, got {tau_p!r}")
    phi_d = v0 * tau_p / (2.0 * HBAR)
    return KickStrength(phi_d=phi_d, v0=v0, tau_p=tau_p, gamma=gamma_from_v0(v0, params))


def gamma_from_v0(v0: float, params: PhysicalParams) -> float:
    """Dimensionless depth gamma = mass*V0/(hbar*kappa)^2."""
    return params.mass * v0 / (HBAR * params.kappa) ** 2


def v0_from_gamma(gamma: float, params: PhysicalParams) -> float:
    """Potential depth (J) for a given dimensionless depth gamma."""
    if gamma < 0.0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be >= 0 and finite, got {gamma!r}")
    return gamma * (HBAR * params.kappa) ** 2 / params.mass


def kick_strength_from_gamma(
    gamma: float, tau_p: float, params: PhysicalParams
) -> KickStrength:
    """KickStrength for a pulse specified by gamma and duration tau_p (s)."""
    return kick_strength_from_pulse(v0_from_gamma(gamma, params), tau_p, params)
