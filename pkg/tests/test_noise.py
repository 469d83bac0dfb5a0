import itertools
import math

import numpy as np
import pytest

from src.cartan import CartanParams
from src.constants import TOL
from src.error_handler import DomainError
from src.linalg import IDENTITY_2, kron, partial_trace
from src.metrology import derivatives_rho, evolve_density, qfim_mixed, qfim_pure
from src.noise import (
    NOISE_COLUMNS,
    ChannelFamily,
    ChannelScope,
    NoiseChannel,
    NoiseScanGrid,
    ProbeClass,
    apply_channel,
    noise_scan,
    noisy_precision,
    noisy_qfim,
    probe_class_state,
)
from src.states import DensityMatrix4, TwoQubitPureState

ORIGIN = CartanParams(0.0, 0.0, 0.0)
VARIANTS = list(itertools.product(ChannelFamily, ChannelScope))


def random_state(rng: np.random.Generator) -> TwoQubitPureState:
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return TwoQubitPureState(z / np.linalg.norm(z))


@pytest.mark.parametrize("family, scope", VARIANTS)
def test_channel_validity(family: ChannelFamily, scope: ChannelScope) -> None:
    for gamma in np.linspace(0, 1, 21):
        channel = NoiseChannel(family, scope, float(gamma))
        assert channel.completeness_error() <= 1e-12, {"gamma": gamma}
        total = sum(weight for weight, _ in channel.mixture())
        assert abs(total - 1) <= 1e-12


def test_two_flip_weights() -> None:
    for gamma in np.linspace(0, 1, 21):
        identity_weight = 1 - 2 * gamma * (1 - gamma) - gamma**2
        assert abs(identity_weight - (1 - gamma) ** 2) <= 1e-12


@pytest.mark.parametrize("gamma", [-0.01, 1.5])
def test_gamma_range_checked(gamma: float) -> None:
    with pytest.raises(DomainError, match="outside"):
        NoiseChannel(ChannelFamily.BIT_FLIP, ChannelScope.SINGLE, gamma)


@pytest.mark.parametrize("family, scope", VARIANTS)
def test_zero_noise_is_identity(
    family: ChannelFamily, scope: ChannelScope, rng: np.random.Generator
) -> None:
    rho = random_state(rng).projector()
    out = apply_channel(NoiseChannel(family, scope, 0.0), rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)


def test_full_bit_flip_on_first_factor() -> None:
    second = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    zero = np.array([[1, 0], [0, 0]])
    one = np.array([[0, 0], [0, 1]])
    channel = NoiseChannel(ChannelFamily.BIT_FLIP, ChannelScope.SINGLE, 1.0)
    out = apply_channel(channel, DensityMatrix4(kron(zero, second)))
    np.testing.assert_allclose(out.matrix, kron(one, second), atol=1e-12)


def test_depolarizing_fixpoint(rng: np.random.Generator) -> None:
    channel = NoiseChannel(ChannelFamily.DEPOLARIZING, ChannelScope.SINGLE, 0.75)
    for _ in range(10):
        out = apply_channel(channel, random_state(rng).projector())
        reduced = partial_trace(out.matrix, 0)
        np.testing.assert_allclose(reduced, IDENTITY_2 / 2, atol=1e-12)
        assert out.spectrum().eigenvalues[0] >= -1e-10


@pytest.mark.parametrize("gamma", [0.0, 1.0])
def test_first_class_recovers_minimum(gamma: float) -> None:
    channel = NoiseChannel(ChannelFamily.BIT_FLIP, ChannelScope.SINGLE, gamma)
    for phi in np.linspace(0, 2 * math.pi, 8, endpoint=False):
        p = noisy_precision(probe_class_state(ProbeClass.PSI1, phi), channel)
        assert p == pytest.approx(0.75, abs=1e-8), {"phi": phi}


def test_noiseless_limit_matches_pure(rng: np.random.Generator) -> None:
    for _ in range(100):
        psi = random_state(rng)
        params = CartanParams.of(rng.uniform(-math.pi, math.pi, size=3))
        pure = qfim_pure(psi, params).p
        for family, scope in VARIANTS:
            channel = NoiseChannel(family, scope, 0.0)
            noisy = noisy_precision(psi, channel, params)
            assert noisy == pytest.approx(pure, rel=1e-8), {"family": family.value}


def test_noisy_qfim_against_finite_differences() -> None:
    psi = probe_class_state(ProbeClass.PSI3, 0.9)
    channel = NoiseChannel(ChannelFamily.DEPOLARIZING, ChannelScope.BOTH, 0.4)
    params = CartanParams(0.3, 0.2, 0.1)
    model = noisy_qfim(psi, channel, params)
    assert math.isfinite(model.qfim.p)
    assert model.qfim.p == pytest.approx(noisy_precision(psi, channel, params))

    rho0 = apply_channel(channel, psi.projector())
    h = TOL.finite_difference_step
    numeric = []
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        center = np.array(list(params))
        forward = evolve_density(CartanParams.of(center + step), rho0).matrix
        backward = evolve_density(CartanParams.of(center - step), rho0).matrix
        numeric.append((forward - backward) / (2 * h))
    oracle = qfim_mixed(evolve_density(params, rho0), numeric)
    np.testing.assert_allclose(oracle.q, model.qfim.q, atol=1e-5)
    assert oracle.p == pytest.approx(model.qfim.p, rel=1e-5)
    np.testing.assert_allclose(derivatives_rho(params, rho0), numeric, atol=1e-6)


def test_bit_flip_scan_symmetry() -> None:
    grid = NoiseScanGrid(ProbeClass.PSI1, gamma_count=11, phi_count=8)
    result = noise_scan(grid, ChannelFamily.BIT_FLIP, ChannelScope.SINGLE)
    assert result.p.shape == (11, 8)
    np.testing.assert_allclose(result.p, result.p[::-1], rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(result.p[0], 0.75, atol=1e-8)
    np.testing.assert_allclose(result.p[-1], 0.75, atol=1e-8)


def test_noiseless_row_matches_class_members() -> None:
    grid = NoiseScanGrid(ProbeClass.PSI2, gamma_count=3, phi_count=6)
    result = noise_scan(grid, ChannelFamily.DEPOLARIZING, ChannelScope.BOTH)
    expected = [
        qfim_pure(probe_class_state(ProbeClass.PSI2, phi), ORIGIN).p
        for phi in grid.phis
    ]
    np.testing.assert_allclose(result.p[0], expected, rtol=1e-8)


def test_third_class_stays_bounded_under_single_depolarizing() -> None:
    channel_gammas = [0.1, 0.3, 0.5, 0.75, 0.9]
    for gamma in channel_gammas:
        channel = NoiseChannel(ChannelFamily.DEPOLARIZING, ChannelScope.SINGLE, gamma)
        for phi in np.linspace(0, 2 * math.pi, 4, endpoint=False):
            p = noisy_precision(probe_class_state(ProbeClass.PSI3, phi), channel)
            assert math.isfinite(p), {"gamma": gamma, "phi": phi}


def test_scan_frame_and_metadata() -> None:
    grid = NoiseScanGrid(ProbeClass.PSI1, gamma_count=2, phi_count=2)
    params = CartanParams(0.1, 0.0, 0.0)
    result = noise_scan(
        grid, ChannelFamily.BIT_FLIP, ChannelScope.BOTH, params, workers=1
    )
    frame = result.to_frame()
    assert list(frame.columns) == NOISE_COLUMNS
    assert len(frame) == 4
    assert list(frame["gamma"]) == [0.0, 0.0, 1.0, 1.0]
    assert list(frame["phi"]) == [0.0, math.pi, 0.0, math.pi]
    metadata = result.metadata()
    assert metadata["lambda"] == [0.1, 0.0, 0.0]
    assert metadata["gamma_count"] == 2 and metadata["phi_count"] == 2
    assert metadata["family"] == "bitflip" and metadata["scope"] == "both"


def test_grid_needs_two_points() -> None:
    with pytest.raises(DomainError):
        NoiseScanGrid(ProbeClass.PSI1, gamma_count=1)
