"""Sampling of travel-time and service-time realizations.

Travel times scale the Euclidean distance of each unordered node pair by an
independent uniform factor; service times follow a log-normal distribution
rejection-truncated to a fixed interval.  Everything is driven by numpy
generators spawned from a single seed, so a (seed, config) pair reproduces a
scenario set exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import DomainError, Instance, Scenario, ScenarioSet


@dataclass(frozen=True)
class ScenarioConfig:
    """Distribution parameters for sampled travel and service times.

    ``service_sigma`` defaults to half the mean.  A zero sigma degenerates to
    constant service times, which is useful for zero-variance checks.
    """

    gamma_low: float = 0.5
    gamma_high: float = 1.5
    service_mu: float = 60.0
    service_sigma: float | None = None
    service_low: float = 30.0
    service_high: float = 90.0

    def __post_init__(self):
        if not (0 <= self.gamma_low <= self.gamma_high):
            raise DomainError("need 0 <= gamma_low <= gamma_high")
        if not (self.service_low < self.service_high):
            raise DomainError("need service_low < service_high")
        if self.sigma < 0:
            raise DomainError("service_sigma must be >= 0")
        if not (self.service_low <= self.service_mu <= self.service_high):
            raise DomainError("service_mu must lie inside the truncation interval")

    @property
    def sigma(self) -> float:
        return 0.5 * self.service_mu if self.service_sigma is None else self.service_sigma

    def lognormal_params(self) -> tuple[float, float]:
        """Underlying normal (mean, sd) giving the untruncated mean/sd target."""
        var_n = math.log(1.0 + (self.sigma / self.service_mu) ** 2)
        mu_n = math.log(self.service_mu) - var_n / 2.0
        return mu_n, math.sqrt(var_n)


def sample_travel_factors(count: int, config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(config.gamma_low, config.gamma_high, size=count)


def sample_service_times(count: int, config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw truncated log-normal service times by rejection."""
    if config.sigma == 0:
        return np.full(count, config.service_mu)
    mu_n, sd_n = config.lognormal_params()
    out = np.empty(count)
    pending = np.arange(count)
    while pending.size:
        draws = rng.lognormal(mu_n, sd_n, size=pending.size)
        ok = (draws >= config.service_low) & (draws <= config.service_high)
        out[pending[ok]] = draws[ok]
        pending = pending[~ok]
    return out


def build_scenario(
    instance: Instance, config: ScenarioConfig, rng: np.random.Generator
) -> Scenario:
    """One realization: a symmetric travel table plus per-client service times.

    A single factor is drawn per unordered node pair (the same road is used in
    both directions) and re-drawn independently per scenario.  Both depot
    copies count as separate nodes, so the outbound and return legs of a
    client get independent factors; the depot-to-depot entry is zero because
    the distance is zero.
    """
    v = instance.n_nodes
    dist = instance.distances
    iu, ju = np.triu_indices(v, k=1)
    gammas = sample_travel_factors(iu.size, config, rng)
    travel = np.zeros((v, v))
    travel[iu, ju] = gammas * dist[iu, ju]
    travel += travel.T
    service = np.zeros(v)
    service[1 : instance.n + 1] = sample_service_times(instance.n, config, rng)
    return Scenario(travel_time=travel, service_time=service)


def build_scenario_set(
    instance: Instance,
    m: int,
    seed: int,
    config: ScenarioConfig | None = None,
) -> ScenarioSet:
    """m independent scenarios from disjoint child streams of one seed."""
    if m < 1:
        raise DomainError("scenario count must be >= 1")
    config = config or ScenarioConfig()
    children = np.random.SeedSequence(seed).spawn(m)
    scenarios = [build_scenario(instance, config, np.random.default_rng(c)) for c in children]
    return ScenarioSet(scenarios, seed=seed, label=f"m{m}")


def mean_scenario(scenario_set: ScenarioSet) -> Scenario:
    """Entrywise arithmetic mean of the set, used by the deterministic model."""
    if not scenario_set.scenarios:
        raise DomainError("cannot average an empty scenario set")
    return Scenario(
        travel_time=scenario_set.travel.mean(axis=0),
        service_time=scenario_set.service.mean(axis=0),
    )


def truncated_service_mean(config: ScenarioConfig) -> float:
    """Analytic mean of the truncated service-time distribution (by quadrature)."""
    if config.sigma == 0:
        return config.service_mu
    from scipy import stats

    mu_n, sd_n = config.lognormal_params()
    dist = stats.lognorm(sd_n, scale=math.exp(mu_n))
    return float(
        dist.expect(lambda x: x, lb=config.service_low, ub=config.service_high, conditional=True)
    )
