"""Two-level probe relaxing toward a thermal bath.

The excited-state population obeys dp/dt = -Gamma (p - p_eq) with

    Gamma = Gamma0 * (1 + alpha * (p0 - p_eq)),    Gamma0 = gamma * (2 nbar + 1),

so preparations farther above equilibrium relax *faster* whenever alpha > 0.
That preparation-dependent rate is the anomalous-relaxation mechanism the rest
of the package studies; alpha = 0 recovers the ordinary linear-response decay.
All results here are exact closed forms (units hbar = k_B = 1), including the
temperature derivatives, which are written in overflow-safe factorized form:

    dT p_eq   = (omega0 / T^2) p_eq (1 - p_eq)
    dT nbar   = (omega0 / T^2) nbar (1 + nbar)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "ColdLimitWarning",
    "UnphysicalRateError",
    "QubitBathParams",
    "ThermalQuantities",
    "QubitTrajectoryPoint",
    "bose_occupation",
    "gibbs_population_qubit",
    "thermal_quantities",
    "effective_rate",
    "evolve_population",
    "relaxation_rhs",
    "dT_gibbs",
    "dT_bose",
    "dT_rate",
    "dT_population",
]

# exp(omega0/T) overflows float64 a little above omega0/T = 709; past this the
# probe is numerically at zero temperature, so limit values are returned with
# a warning instead of raising OverflowError.
COLD_CUTOFF = 700.0


class ColdLimitWarning(RuntimeWarning):
    """omega0/T exceeded the overflow cutoff; zero-temperature limits returned."""


class UnphysicalRateError(ValueError):
    """The effective relaxation rate came out non-positive."""


def _require_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class QubitBathParams:
    """Probe splitting, bare coupling, bath temperature, and rate-mixing strength."""

    omega0: float
    gamma: float
    temperature: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        _require_positive("omega0", self.omega0)
        _require_positive("gamma", self.gamma)
        _require_positive("temperature", self.temperature)
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")


@dataclass(frozen=True)
class ThermalQuantities:
    """Bath occupation, equilibrium population, and bare relaxation rate."""

    n_bar: float
    p_eq: float
    gamma0: float


@dataclass(frozen=True)
class QubitTrajectoryPoint:
    time: float
    population: float
    dT_population: float


def _cold(omega0: float, temperature: float) -> bool:
    if omega0 / temperature > COLD_CUTOFF:
        warnings.warn(
            f"omega0/T = {omega0 / temperature:.3g} exceeds the overflow cutoff; "
            "returning zero-temperature limit",
            ColdLimitWarning,
            stacklevel=3,
        )
        return True
    return False


def bose_occupation(omega0: float, temperature: float) -> float:
    """Mean bath occupation 1 / (exp(omega0/T) - 1)."""
    _require_positive("omega0", omega0)
    _require_positive("temperature", temperature)
    if _cold(omega0, temperature):
        return 0.0
    return 1.0 / math.expm1(omega0 / temperature)


def gibbs_population_qubit(omega0: float, temperature: float) -> float:
    """Equilibrium excited population 1 / (1 + exp(omega0/T))."""
    _require_positive("omega0", omega0)
    _require_positive("temperature", temperature)
    if _cold(omega0, temperature):
        return 0.0
    return 1.0 / (1.0 + math.exp(omega0 / temperature))


def thermal_quantities(params: QubitBathParams) -> ThermalQuantities:
    n_bar = bose_occupation(params.omega0, params.temperature)
    return ThermalQuantities(
        n_bar=n_bar,
        p_eq=gibbs_population_qubit(params.omega0, params.temperature),
        gamma0=params.gamma * (2.0 * n_bar + 1.0),
    )


def _check_population(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def effective_rate(params: QubitBathParams, p0: float) -> float:
    """Preparation-dependent rate Gamma0 * (1 + alpha * (p0 - p_eq))."""
    _check_population("p0", p0)
    q = thermal_quantities(params)
    rate = q.gamma0 * (1.0 + params.alpha * (p0 - q.p_eq))
    if rate <= 0.0:
        raise UnphysicalRateError(
            f"effective rate {rate:.6g} is non-positive (alpha={params.alpha}, "
            f"p0={p0}, p_eq={q.p_eq:.6g})"
        )
    return rate


def evolve_population(params: QubitBathParams, p0: float, t: float) -> float:
    """Exact solution p(t) = p_eq + (p0 - p_eq) exp(-Gamma t)."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    rate = effective_rate(params, p0)
    q = thermal_quantities(params)
    return q.p_eq + (p0 - q.p_eq) * math.exp(-rate * t)


def relaxation_rhs(params: QubitBathParams, p0: float):
    """Right-hand side f(t, p) = -Gamma (p - p_eq) for numerical integration.

    The rate is frozen at the preparation value p0, matching the convention
    used throughout: the anomalous dependence enters through the preparation,
    not through the instantaneous state.
    """
    rate = effective_rate(params, p0)
    p_eq = gibbs_population_qubit(params.omega0, params.temperature)

    def rhs(t: float, p: float) -> float:
        return -rate * (p - p_eq)

    return rhs


def dT_gibbs(omega0: float, temperature: float) -> float:
    """Temperature derivative of the equilibrium population (factorized form)."""
    p_eq = gibbs_population_qubit(omega0, temperature)
    return (omega0 / temperature**2) * p_eq * (1.0 - p_eq)


def dT_bose(omega0: float, temperature: float) -> float:
    """Temperature derivative of the bath occupation (factorized form)."""
    n_bar = bose_occupation(omega0, temperature)
    return (omega0 / temperature**2) * n_bar * (1.0 + n_bar)


def dT_rate(params: QubitBathParams, p0: float) -> float:
    """Temperature derivative of the effective rate at fixed preparation.

    dT Gamma = dT Gamma0 * (1 + alpha (p0 - p_eq)) - alpha Gamma0 * dT p_eq;
    the second term is the anomalous contribution (p0 is held fixed while the
    equilibrium point moves with T).
    """
    _check_population("p0", p0)
    q = thermal_quantities(params)
    d_gamma0 = 2.0 * params.gamma * dT_bose(params.omega0, params.temperature)
    d_peq = dT_gibbs(params.omega0, params.temperature)
    return d_gamma0 * (1.0 + params.alpha * (p0 - q.p_eq)) - params.alpha * q.gamma0 * d_peq


def dT_population(params: QubitBathParams, p0: float, t: float) -> float:
    """Temperature sensitivity of the relaxing population at fixed (p0, t).

    dT p(t) = dT p_eq (1 - e^{-Gamma t}) - (p0 - p_eq) t e^{-Gamma t} dT Gamma.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    rate = effective_rate(params, p0)
    q = thermal_quantities(params)
    d_peq = dT_gibbs(params.omega0, params.temperature)
    decay = math.exp(-rate * t)
    return d_peq * (1.0 - decay) - (p0 - q.p_eq) * t * decay * dT_rate(params, p0)


def trajectory_point(params: QubitBathParams, p0: float, t: float) -> QubitTrajectoryPoint:
    return QubitTrajectoryPoint(
        time=t,
        population=evolve_population(params, p0, t),
        dT_population=dT_population(params, p0, t),
    )
