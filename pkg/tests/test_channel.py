import math

import numpy as np
import pytest
from scipy import stats

from linksched.channel import (
    Deployment,
    DeploymentInfeasible,
    GeometryParams,
    PathLossParams,
    SystemParams,
    deploy_network,
    generate_channel,
    make_rng,
    path_loss_db,
    sample_channel,
)


def test_noise_over_pmax_default():
    # -174 dBm/Hz + 70 dB - 10 dBm
    assert SystemParams().noise_over_pmax == pytest.approx(10 ** (-11.4), rel=1e-12)


def test_single_link_deployment():
    geom = GeometryParams()
    dep = deploy_network(1, geom, make_rng(0, 1))
    d = np.linalg.norm(dep.tx_positions[0] - dep.rx_positions[0])
    assert 10.0 <= d <= 50.0
    assert np.all((dep.tx_positions >= 0) & (dep.tx_positions <= 250))
    assert np.all((dep.rx_positions >= 0) & (dep.rx_positions <= 250))


def test_deployment_deterministic():
    a = deploy_network(10, GeometryParams(), make_rng(99, 5))
    b = deploy_network(10, GeometryParams(), make_rng(99, 5))
    assert np.array_equal(a.tx_positions, b.tx_positions)
    assert np.array_equal(a.rx_positions, b.rx_positions)


def test_min_separation_monte_carlo():
    geom = GeometryParams()
    rng = make_rng(2024, 0)
    worst = np.inf
    for _ in range(10_000):
        tx = deploy_network(4, geom, rng).tx_positions
        d = np.sqrt(((tx[:, None] - tx[None]) ** 2).sum(-1))
        worst = min(worst, d[np.triu_indices(4, 1)].min())
    assert worst >= 35.0


def test_ring_and_square_invariants():
    geom = GeometryParams()
    rng = make_rng(5, 5)
    for _ in range(200):
        dep = deploy_network(8, geom, rng)
        d = np.linalg.norm(dep.tx_positions - dep.rx_positions, axis=1)
        assert np.all((d >= 10.0) & (d <= 50.0))
        assert np.all((dep.rx_positions >= 0) & (dep.rx_positions <= 250))


def test_infeasible_geometry_raises():
    geom = GeometryParams(area_side=50.0, max_attempts=50, max_restarts=2)
    with pytest.raises(DeploymentInfeasible, match="k=20"):
        deploy_network(20, geom, make_rng(0))


def test_first_transmitter_uniform_chi_square():
    geom = GeometryParams()
    rng = make_rng(77)
    pts = np.array([deploy_network(4, geom, rng).tx_positions[0] for _ in range(10_000)])
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=5, range=[[0, 250], [0, 250]])
    assert stats.chisquare(counts.ravel()).pvalue > 0.001


def test_path_loss_reference_and_continuity():
    pl = PathLossParams()
    assert path_loss_db(1.0, pl) == pytest.approx(40.0)
    assert path_loss_db(50.0, pl) == pytest.approx(path_loss_db(50.0 * (1 + 1e-12), pl), abs=1e-6)


def test_path_loss_far_region_hand_value():
    # 40 + 20 log10(50) + 40 log10(2)
    expected = 40 + 20 * math.log10(50) + 40 * math.log10(2)
    assert path_loss_db(100.0, PathLossParams()) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(86.02, abs=0.005)


def test_path_loss_monotone():
    d = np.linspace(0.5, 500, 2000)
    assert np.all(np.diff(path_loss_db(d, PathLossParams())) > 0)


@pytest.mark.parametrize("bad", [0.0, -3.0])
def test_path_loss_domain(bad):
    with pytest.raises(ValueError):
        path_loss_db(bad, PathLossParams())


def test_no_shadowing_gives_pure_path_loss():
    dep = Deployment(250.0, np.array([[0.0, 0.0], [100.0, 0.0]]), np.array([[20.0, 0.0], [100.0, 30.0]]))
    pl = PathLossParams(shadowing_std_db=0.0)
    ch = sample_channel(dep, pl, make_rng(0))
    expected = 10 ** (-path_loss_db(dep.distances(), pl) / 10)
    assert np.allclose(ch.gain_sq, expected, rtol=1e-14)
    # entry (0, 1): Tx_1 at (100, 0) to Rx_0 at (20, 0)
    assert ch.gain_sq[0, 1] == pytest.approx(10 ** (-path_loss_db(80.0, pl) / 10))


def test_shadowing_std_monte_carlo():
    pl = PathLossParams()
    rng = make_rng(3)
    pts = rng.uniform(0, 250, size=(100, 2))
    dep = Deployment(250.0, pts, pts + 15.0)
    loss = path_loss_db(dep.distances(), pl)
    s = []
    for _ in range(10):
        g = sample_channel(dep, pl, rng).gain_sq
        s.append(-10 * np.log10(g) - loss)
    s = np.concatenate(s).ravel()
    assert s.size == 100_000
    assert abs(s.std() / 7.0 - 1) < 0.01
    assert abs(s.mean()) < 0.1


def test_channel_deterministic_and_positive():
    a = generate_channel(10, 42, 3, "train")
    b = generate_channel(10, 42, 3, "train")
    assert np.array_equal(a.gain_sq, b.gain_sq)
    assert np.all(a.gain_sq > 0) and np.all(np.isfinite(a.gain_sq))


def test_sample_streams_independent_of_order():
    late_first = generate_channel(6, 1, 5, "test").gain_sq
    for i in range(5):
        generate_channel(6, 1, i, "test")
    assert np.array_equal(late_first, generate_channel(6, 1, 5, "test").gain_sq)
    assert not np.array_equal(late_first, generate_channel(6, 1, 5, "train").gain_sq)


@pytest.mark.parametrize("kwargs", [dict(exp_near=3.0, exp_far=2.0), dict(breakpoint_m=0), dict(shadowing_std_db=-1)])
def test_path_loss_params_invariants(kwargs):
    with pytest.raises(ValueError):
        PathLossParams(**kwargs)
