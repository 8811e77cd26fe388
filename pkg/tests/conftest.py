import numpy as np
import pytest

from vrasp.domain import Client, CostParams, Instance, Scenario, ScenarioSet


def plain_params(**overrides) -> CostParams:
    base = dict(
        c_fixed=100.0,
        c_overtime=1.0,
        c_wait=2.0,
        travel_cost_factor=0.5,
        shift_length=480.0,
    )
    base.update(overrides)
    return CostParams(**base)


def line_instance(ys, k=1, params=None, depot=(0.0, 0.0)) -> Instance:
    """Clients stacked on the y axis at the given heights."""
    clients = [Client(i + 1, 0.0, float(y)) for i, y in enumerate(ys)]
    return Instance(clients, depot, k, params or plain_params())


def xy_instance(points, k=1, params=None, depot=(0.0, 0.0)) -> Instance:
    clients = [Client(i + 1, float(x), float(y)) for i, (x, y) in enumerate(points)]
    return Instance(clients, depot, k, params or plain_params())


def make_scenario(
    instance: Instance,
    gamma: float = 1.0,
    service: float = 0.0,
    travel_overrides: dict | None = None,
    service_overrides: dict | None = None,
) -> Scenario:
    """Scenario with travel = gamma * distance plus explicit entry overrides."""
    travel = gamma * instance.distances.copy()
    for (i, j), value in (travel_overrides or {}).items():
        travel[i, j] = travel[j, i] = value
    st = np.zeros(instance.n_nodes)
    st[1 : instance.n + 1] = service
    for cid, value in (service_overrides or {}).items():
        st[cid] = value
    return Scenario(travel_time=travel, service_time=st)


def single_set(scenario: Scenario, seed: int = 0) -> ScenarioSet:
    return ScenarioSet([scenario], seed=seed)


@pytest.fixture
def params():
    return plain_params()
