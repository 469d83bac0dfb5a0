import functools
import itertools
import json
import math
import os
from typing import Any, Dict, List

import numpy as np
import pytest

from src.cartan import CartanParams
from src.error_handler import DomainError
from src.metrology import (
    closed_bell_metrics,
    qfim_closed_bell,
    qfim_closed_canonical,
    qfim_pure,
)
from src.optimal import (
    MAX_INV_SLOPPINESS,
    MIN_PRECISION,
    OptimalFamily,
    OptimalFamilySpec,
    Pairing,
    bell_uniform_state,
    det_at_fixed_p,
    det_map,
    entangled_state,
    factorized_state,
    fixed_p_d,
    frontier,
    frontier_maxima,
    make_optimal,
    maximize_det_at_fixed_p,
    rx_generate,
    sin2theta,
    suboptimal_amplitudes,
    suboptimal_state,
)
from src.states import Basis, TwoQubitPureState, canonical_params, concurrence_pure

S = 1 / math.sqrt(2)
ORIGIN = CartanParams(0.0, 0.0, 0.0)

tests_dir = os.path.dirname(__file__)


@functools.lru_cache(maxsize=None)
def load_points(name: str) -> List[Dict[str, Any]]:
    with open(os.path.join(tests_dir, "data", name)) as f:
        return json.load(f)


def bell_moduli(psi: TwoQubitPureState) -> np.ndarray:
    return np.abs(psi.in_basis(Basis.BELL).amplitudes)


def optimal_members() -> List[TwoQubitPureState]:
    members = [
        factorized_state(index, phi) for index in (1, 2, 3, 4) for phi in (0.0, 1.3)
    ]
    for alpha, beta in itertools.product((0.0, 0.2, 0.5, S), repeat=2):
        for plus_first, plus_second in itertools.product((True, False), repeat=2):
            members.append(entangled_state(alpha, beta, 0.4, plus_first, plus_second))
    for phases in ((0.0, 0.0, 0.0), (0.3, -1.2, 2.0)):
        members.append(bell_uniform_state(phases))
    return members


def test_optimal_point_across_families() -> None:
    members = optimal_members()
    assert len(members) >= 50
    for psi in members:
        qfim = qfim_pure(psi, ORIGIN)
        assert abs(qfim.p - MIN_PRECISION) <= 1e-9, {"state": repr(psi), "p": qfim.p}
        assert abs(qfim.inv_s - MAX_INV_SLOPPINESS) <= 1e-9
        assert abs(qfim.matrix_bound_gap) <= 1e-8


def test_factorized_members() -> None:
    np.testing.assert_allclose(factorized_state(1).amplitudes, [S, S, 0, 0])
    for index in (1, 2, 3, 4):
        assert concurrence_pure(factorized_state(index, 0.9)) == pytest.approx(0)
    with pytest.raises(DomainError):
        factorized_state(5)


def test_entangled_examples() -> None:
    psi = entangled_state(0.0, 0.0)
    np.testing.assert_allclose(psi.amplitudes, [0, 0, 1j * S, 1j * S], atol=1e-15)
    assert concurrence_pure(psi) == pytest.approx(0, abs=1e-15)
    third_class = entangled_state(0.3, 0.2, 0.8)
    assert qfim_pure(third_class, ORIGIN).p == pytest.approx(0.75, abs=1e-9)


@pytest.mark.parametrize("alpha, beta", [(-0.1, 0.2), (0.2, 0.75), (1.0, 0.0)])
def test_entangled_range_checked(alpha: float, beta: float) -> None:
    with pytest.raises(DomainError, match="outside"):
        entangled_state(alpha, beta)


@pytest.mark.parametrize(
    "index, alpha, beta, shift",
    [
        (1, S, S, 0.0),
        (2, S, 0.0, -math.pi / 2),
        (3, 0.0, S, math.pi / 2),
        (4, 0.0, 0.0, 0.0),
    ],
)
def test_separable_members_are_entangled_members(
    index: int, alpha: float, beta: float, shift: float
) -> None:
    for phi in np.linspace(0, 2 * math.pi, 7):
        separable = factorized_state(index, phi)
        member = entangled_state(alpha, beta, phi + shift)
        assert separable.fidelity(member) == pytest.approx(1, abs=1e-10)


def test_entangled_sweep_spans_concurrence() -> None:
    values = [
        concurrence_pure(entangled_state(alpha, beta, 0.0, True, plus_second))
        for alpha in np.linspace(0, S, 21)
        for beta in np.linspace(0, S, 21)
        for plus_second in (True, False)
    ]
    assert min(values) <= 0.01
    assert max(values) >= 0.99


def test_sin2theta_on_optimal_family() -> None:
    alpha, beta, gamma, delta, *_ = canonical_params(entangled_state(0.3, 0.6))
    # both blocks carry half the weight
    assert sin2theta(alpha, beta, gamma, delta) == pytest.approx(1)


@pytest.mark.parametrize("theta", [0.3, 0.6, 1.0])
def test_phase_optimal_probes_follow_sin2theta(theta: float) -> None:
    outer = math.sin(theta) / math.sqrt(2)
    inner = math.cos(theta) / math.sqrt(2)
    amplitudes = (outer, inner, inner, outer)
    qfim = qfim_closed_canonical(*amplitudes, math.pi / 2, 0.0, math.pi / 2)
    sine = math.sin(2 * theta)
    assert sin2theta(*amplitudes) == pytest.approx(sine, rel=1e-12)
    assert qfim.inv_s == pytest.approx(64 * sine**4, rel=1e-10), {"theta": theta}
    assert qfim.p == pytest.approx(3 / (4 * sine**2), rel=1e-10), {"theta": theta}


@pytest.mark.parametrize("pairing", list(Pairing))
def test_rx_generation_stays_optimal(pairing: Pairing) -> None:
    np.testing.assert_allclose(rx_generate(0, 0, pairing).amplitudes, [S, S, 0, 0])
    quarter = rx_generate(math.pi / 2, 0.3, pairing)
    assert qfim_pure(quarter, ORIGIN).p == pytest.approx(0.75, abs=1e-9)
    for theta_a in np.linspace(0, math.pi / 2, 9, endpoint=False):
        for theta_b in np.linspace(0, math.pi / 2, 9, endpoint=False):
            psi = rx_generate(theta_a, theta_b, pairing, phi=0.6)
            assert qfim_pure(psi, ORIGIN).p == pytest.approx(0.75, abs=1e-9)


def test_frontier_at_minimum_precision() -> None:
    assert frontier(0.75) == pytest.approx(64, abs=1e-9)
    assert frontier(0.75 + 1e-4) == pytest.approx(64 - 512 / 3 * 1e-4, abs=5e-4)


def test_frontier_slope_near_minimum() -> None:
    h = 1e-8
    slope = (frontier(0.75 + h) - frontier(0.75)) / h
    assert slope == pytest.approx(-512 / 3, rel=1e-3)


def test_frontier_rejects_low_precision() -> None:
    with pytest.raises(DomainError, match="below"):
        frontier(0.7)
    with pytest.raises(DomainError):
        suboptimal_state(0.5)


@pytest.mark.parametrize("point", load_points("frontier_points.json"))
def test_frontier_values(point: Dict[str, Any]) -> None:
    p = point["p"]
    assert frontier(p) == pytest.approx(point["inv_s"], rel=1e-12)
    kappa1, kappa2 = suboptimal_amplitudes(p)
    assert kappa1 == pytest.approx(point["kappa1"], rel=1e-12)
    assert kappa2 == pytest.approx(point["kappa2"], rel=1e-12)


@pytest.mark.parametrize("point", load_points("frontier_points.json"))
def test_grid_maximization_matches_frontier(point: Dict[str, Any]) -> None:
    best = maximize_det_at_fixed_p(point["p"])
    assert best.inv_s == pytest.approx(point["inv_s"], rel=1e-5), best.to_dict()


@pytest.mark.parametrize("point", load_points("frontier_points.json"))
def test_three_maxima_share_the_frontier(point: Dict[str, Any]) -> None:
    diagonal, *edges = frontier_maxima(point["p"])
    assert diagonal.b == diagonal.c
    for maximum in [diagonal, *edges]:
        assert maximum.inv_s == pytest.approx(point["inv_s"], rel=1e-8)


@pytest.mark.parametrize("point", load_points("suboptimal_points.json"))
def test_suboptimal_round_trip(point: Dict[str, Any]) -> None:
    p = point["p"]
    for position in (1, 2, 3, 4):
        psi = suboptimal_state(p, position, (0.2, -0.4, 1.0))
        assert psi.basis == Basis.BELL
        _, b, c, d = bell_moduli(psi)
        qfim = qfim_closed_bell(b, c, d)
        assert qfim.p == pytest.approx(p, rel=1e-8), {"position": position}
        assert qfim.inv_s == pytest.approx(point["inv_s"], rel=1e-8)


def test_suboptimal_at_minimum_is_uniform() -> None:
    assert suboptimal_amplitudes(0.75) == (0.5, 0.5)
    psi = suboptimal_state(0.75)
    assert psi.fidelity(bell_uniform_state()) == pytest.approx(1, abs=1e-12)


def test_det_at_fixed_p_examples() -> None:
    assert det_at_fixed_p(0.5, 0.5, 0.75) == pytest.approx(64, abs=1e-9)
    b = c = 0.5
    d = fixed_p_d(b, c, 1.0)
    qfim = qfim_closed_bell(b, c, d)
    assert qfim.p == pytest.approx(1.0, rel=1e-8)
    assert qfim.inv_s == pytest.approx(det_at_fixed_p(b, c, 1.0), rel=1e-8)
    larger = fixed_p_d(b, c, 1.0, larger=True)
    assert qfim_closed_bell(b, c, larger).inv_s == pytest.approx(qfim.inv_s, rel=1e-8)


@pytest.mark.parametrize(
    "b, c, p, message",
    [
        (0.1, 0.5, 1.0, "not positive"),
        (0.8, 0.7, 1.0, "no room"),
        (0.0, 0.5, 1.0, "positive"),
        (0.5, 0.5, 0.7, "below"),
    ],
)
def test_det_at_fixed_p_domain(b: float, c: float, p: float, message: str) -> None:
    with pytest.raises(DomainError, match=message):
        det_at_fixed_p(b, c, p)


def test_frontier_bounds_random_bell_states(rng: np.random.Generator) -> None:
    z = rng.standard_normal((10_000, 4))
    moduli = np.abs(z / np.linalg.norm(z, axis=1, keepdims=True))
    p, inv_s = closed_bell_metrics(moduli[:, 1], moduli[:, 2], moduli[:, 3])
    for p_value, inv_s_value in zip(p, inv_s):
        if math.isfinite(p_value):
            assert inv_s_value <= frontier(max(p_value, MIN_PRECISION)) + 1e-6


def test_family_spec_dispatch() -> None:
    spec = OptimalFamilySpec(OptimalFamily.SUB_OPTIMAL_AT_P, p=2.0, position=3)
    restored = OptimalFamilySpec.from_dict(spec.to_dict())
    assert restored == spec
    psi = make_optimal(restored)
    _, b, c, d = bell_moduli(psi)
    assert qfim_closed_bell(b, c, d).p == pytest.approx(2.0, rel=1e-8)
    with pytest.raises(DomainError, match="precision"):
        make_optimal(OptimalFamilySpec(OptimalFamily.SUB_OPTIMAL_AT_P))
    with pytest.raises(DomainError):
        OptimalFamilySpec.from_dict({"family": "heisenberg"})


@pytest.mark.parametrize(
    "data", [5, [1], "ab", None, {"family": "bell-uniform", "x": 1}]
)
def test_family_spec_rejects_malformed(data: Any) -> None:
    with pytest.raises(DomainError, match="Malformed"):
        OptimalFamilySpec.from_dict(data)


@pytest.mark.parametrize("point", load_points("frontier_points.json"))
def test_det_map_stays_below_frontier(point: Dict[str, float]) -> None:
    axis, values = det_map(point["p"])
    assert values.shape == (axis.size, axis.size) == (256, 256)
    assert np.isnan(values).any()
    best = float(np.nanmax(values))
    assert best <= point["inv_s"] * (1 + 1e-9), {"p": point["p"], "best": best}
    assert best == pytest.approx(point["inv_s"], rel=1e-3)


def test_det_map_rejects_bad_input() -> None:
    with pytest.raises(DomainError):
        det_map(0.7)
    with pytest.raises(DomainError):
        det_map(1.0, bins=1)
