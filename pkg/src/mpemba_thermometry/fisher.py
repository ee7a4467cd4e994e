"""Fisher information carried by population measurements about temperature.

For a diagonal (classical) probe state the quantum Fisher information of the
temperature parameter equals the classical Fisher information of the
population distribution, F = sum_i (dT p_i)^2 / p_i, so projective population
readout already saturates the quantum bound.  All the estimation theory in
this package runs on that quantity.
"""

from __future__ import annotations

import math

import numpy as np

from .qubit import (
    QubitBathParams,
    dT_gibbs,
    dT_rate,
    effective_rate,
    evolve_population,
    gibbs_population_qubit,
    thermal_quantities,
)
from .spectral import PopulationVector

__all__ = [
    "DivergentFisherError",
    "fisher_from_populations",
    "qfi_qubit_closed_form",
    "qfi_equilibrium",
    "qfi_short_time",
    "cramer_rao_bound",
]

# Below these floors a vanishing population is treated as a genuinely empty
# level (contributing nothing) rather than a divergence, provided its
# sensitivity vanishes with it.
_POPULATION_FLOOR = 1e-15
_SENSITIVITY_FLOOR = 1e-12


class DivergentFisherError(ZeroDivisionError):
    """A population hit 0 or 1 while its temperature sensitivity did not vanish."""


def fisher_from_populations(populations, d_populations) -> float:
    """F = sum_i (dT p_i)^2 / p_i for a population vector and its sensitivity.

    A level with p_i < 1e-15 contributes 0 if |dT p_i| < 1e-12 (an empty level
    carries no information) and raises :class:`DivergentFisherError` otherwise.
    """
    if isinstance(populations, PopulationVector):
        populations = populations.populations
    p = np.asarray(populations, dtype=float)
    dp = np.asarray(d_populations, dtype=float)
    if p.shape != dp.shape:
        raise ValueError(f"shape mismatch: populations {p.shape} vs sensitivities {dp.shape}")
    if float(p.min()) < -1e-12:
        raise ValueError(f"negative population {float(p.min()):.3g}")
    if abs(float(dp.sum())) > 1e-8:
        raise ValueError(
            f"sensitivities sum to {float(dp.sum()):.3g}; dT of a normalized "
            "distribution must sum to zero"
        )
    total = 0.0
    for pi, dpi in zip(p, dp):
        if pi < _POPULATION_FLOOR:
            if abs(dpi) < _SENSITIVITY_FLOOR:
                continue
            raise DivergentFisherError(
                f"population {pi:.3g} vanishes while its sensitivity {dpi:.3g} does not"
            )
        total += dpi * dpi / pi
    return total


def qfi_qubit_closed_form(params: QubitBathParams, p0: float, t: float) -> float:
    """Exact trajectory Fisher information of the relaxing two-level probe.

    With E = exp(-Gamma t) the squared sensitivity expands into three terms —
    the equilibrium-gradient part, the rate-dispersion part, and their cross
    term:

        F(t) = [ (dT p_eq)^2 (1-E)^2
                 + (p0 - p_eq)^2 t^2 E^2 (dT Gamma)^2
                 - 2 (p0 - p_eq) (dT p_eq) t E (1-E) dT Gamma ] / (p (1-p)).
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    q = thermal_quantities(params)
    rate = effective_rate(params, p0)
    d_rate = dT_rate(params, p0)
    d_peq = dT_gibbs(params.omega0, params.temperature)
    decay = math.exp(-rate * t)
    p_t = evolve_population(params, p0, t)
    variance = p_t * (1.0 - p_t)
    if variance < _POPULATION_FLOOR:
        raise DivergentFisherError(
            f"population {p_t:.3g} is deterministic; Fisher information diverges"
        )
    excess = p0 - q.p_eq
    numerator = (
        d_peq**2 * (1.0 - decay) ** 2
        + excess**2 * t**2 * decay**2 * d_rate**2
        - 2.0 * excess * d_peq * t * decay * (1.0 - decay) * d_rate
    )
    return numerator / variance


def qfi_equilibrium(omega0: float, temperature: float) -> float:
    """Fisher information of the thermalized probe, (dT p_eq)^2 / (p_eq (1 - p_eq))."""
    p_eq = gibbs_population_qubit(omega0, temperature)
    variance = p_eq * (1.0 - p_eq)
    if variance < _POPULATION_FLOOR:
        raise DivergentFisherError(
            f"equilibrium population {p_eq:.3g} is deterministic at T={temperature}"
        )
    return dT_gibbs(omega0, temperature) ** 2 / variance


def qfi_short_time(params: QubitBathParams, p0: float, t: float) -> float:
    """Leading t^2 behaviour of the trajectory Fisher information.

    F(t) ~ [dT p_eq * Gamma - (p0 - p_eq) * dT Gamma]^2 t^2 / (p0 (1 - p0)).
    Valid for Gamma t << 1; provided for expansion cross-checks, not as a
    substitute for the closed form.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    variance = p0 * (1.0 - p0)
    if variance < _POPULATION_FLOOR:
        raise DivergentFisherError(f"preparation p0={p0} is deterministic")
    q = thermal_quantities(params)
    rate = effective_rate(params, p0)
    d_rate = dT_rate(params, p0)
    d_peq = dT_gibbs(params.omega0, params.temperature)
    slope = d_peq * rate - (p0 - q.p_eq) * d_rate
    return slope**2 * t**2 / variance


def cramer_rao_bound(fisher: float, shots: int) -> float:
    """Variance floor 1 / (shots * F); infinite when F vanishes."""
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    if fisher < 0:
        raise ValueError(f"Fisher information must be non-negative, got {fisher}")
    if fisher == 0.0:
        return math.inf
    return 1.0 / (shots * fisher)
