import numpy as np
import pytest

from pilotforge.baselines import fos_pilots, wbe_pilots
from pilotforge.gwbe import design_network
from pilotforge.link import (
    allocate_power,
    compute_alpha,
    min_antennas,
    min_antennas_fos_closed_form,
    min_antennas_wbe_closed_form,
    sinr_asymptotic,
    sinr_finite,
)
from pilotforge.model import NetworkConfig, PilotBook, SinrTargets

GWBE_ALPHA_REF = np.array(
    [[3.03, 3.35, 3.99, 4.25], [3.03, 3.34, 4.01, 4.33]]
)


@pytest.fixture(scope="module")
def designed(table1):
    book, targets = design_network(table1.targets, table1.config)
    alpha = compute_alpha(book, table1.config)
    power = allocate_power(alpha, targets, "gwbe")
    return book, targets, alpha, power


def test_alpha_fos_exact(table1):
    book, _ = fos_pilots(4, 3, 2)
    alpha = compute_alpha(book, table1.config)
    expected = np.array([[4.8, 2.9, 2.9, 4.8]] * 2)
    assert np.max(np.abs(alpha - expected)) < 1e-9


def test_alpha_wbe_constant(table1):
    book, _ = wbe_pilots(4, 3, 2)
    alpha = compute_alpha(book, table1.config)
    assert np.max(np.abs(alpha - 106.0 / 30.0)) < 1e-9


def test_alpha_gwbe_near_reference(designed):
    _, _, alpha, _ = designed
    assert np.max(np.abs(alpha - GWBE_ALPHA_REF)) < 0.05


def test_alpha_dimension_mismatch(table1):
    book, _ = fos_pilots(4, 2, 2)
    with pytest.raises(ValueError, match="dimensions"):
        compute_alpha(book, table1.config)


def test_allocate_power_formulas(table1):
    z_hat = lambda g: g / (1 + g)
    alpha = np.full((2, 4), 3.03)
    gh = table1.targets.gamma_hat
    power = allocate_power(alpha, table1.targets, "gwbe")
    assert abs(power.power[0, 0] - 3.03 * z_hat(gh[0, 0])) < 1e-12
    assert abs(power.power[0, 0] - 1.452) < 1e-3

    wbe_alpha = np.full((2, 4), 106.0 / 30.0)
    p_wbe = allocate_power(wbe_alpha, table1.targets, "wbe")
    assert abs(p_wbe.power[0, 0] - (106 / 30) * (0.91 / 1.91)) < 1e-12

    with pytest.raises(ValueError, match="gamma_hat"):
        allocate_power(alpha, SinrTargets.from_rows(table1.targets.gamma), "gwbe")


def test_allocate_power_vanishing_target():
    targets = SinrTargets.from_rows([[0.5, 1e-15]])
    power = allocate_power(np.array([[3.0, 3.0]]), targets, "fos")
    assert power.power[0, 1] <= 1e-12


def test_sinr_no_interference_reduces_to_noise_term():
    # single cell, orthogonal pilots: theta = beta P / ((alpha / M) Pbar)
    cfg = NetworkConfig.uniform(1, 3, 3)
    book, _ = fos_pilots(3, 3, 1)
    targets = SinrTargets.from_rows([[0.5, 0.4, 0.3]])
    alpha = compute_alpha(book, cfg)
    assert np.allclose(alpha, 2.0)  # self term + unit noise
    power = allocate_power(alpha, targets, "fos")
    M = 64
    rep = sinr_finite(book, power, cfg, M, targets)
    pbar = power.power.sum() + 1.0
    expected = power.power / (alpha / M * pbar)
    assert np.allclose(rep.theta, expected, rtol=1e-12)
    assert np.all(rep.rates == np.log2(1 + rep.theta))


def test_sinr_monotone_in_antennas(designed, table1):
    book, targets, _, power = designed
    prev = None
    for m in (1, 8, 64, 512):
        theta = sinr_finite(book, power, table1.config, m).theta
        if prev is not None:
            assert np.all(theta >= prev)
        prev = theta


def test_finite_approaches_asymptotic(designed, table1):
    book, targets, _, power = designed
    asy = sinr_asymptotic(book, power, table1.config)
    fin = sinr_finite(book, power, table1.config, 10**6)
    gap = np.abs(fin.theta - asy.theta) / asy.theta
    assert np.max(gap) < 0.005
    assert np.all(fin.theta <= asy.theta)


def test_finite_approaches_asymptotic_baselines(table1):
    cfg = table1.config
    for maker, scheme in ((wbe_pilots, "wbe"), (fos_pilots, "fos")):
        book, _ = maker(4, 3, 2)
        power = allocate_power(compute_alpha(book, cfg), table1.targets, scheme)
        asy = sinr_asymptotic(book, power, cfg).theta
        fin = sinr_finite(book, power, cfg, 10**6).theta
        assert np.max(np.abs(fin - asy) / asy) < 0.005


def test_asymptotic_guarantee_for_designed_power(designed, table1):
    book, targets, _, power = designed
    rep = sinr_asymptotic(book, power, table1.config, targets)
    assert np.all(rep.theta >= targets.gamma_hat - 1e-9)
    assert rep.met.all()
    assert rep.antennas == np.inf


def test_asymptotic_infinite_without_contamination():
    cfg = NetworkConfig.uniform(1, 1, 1)
    book = PilotBook(np.array([[1.0]]), 1, 1)
    targets = SinrTargets.from_rows([[0.5]])
    power = allocate_power(compute_alpha(book, cfg), targets, "fos")
    rep = sinr_asymptotic(book, power, cfg)
    assert np.isinf(rep.theta[0, 0])


def test_noise_scaling(designed, table1):
    book, targets, _, power = designed
    cfg = table1.config
    louder = NetworkConfig.uniform(
        2, 4, 3, sigma_w2=2.0, sigma_z2=cfg.uplink_noise_power
    )
    base_fin = sinr_finite(book, power, cfg, 100).theta
    loud_fin = sinr_finite(book, power, louder, 100).theta
    assert np.all(loud_fin < base_fin)
    assert np.allclose(
        sinr_asymptotic(book, power, louder).theta,
        sinr_asymptotic(book, power, cfg).theta,
    )


def test_alpha_matches_loop_oracle(asymmetric_network):
    cfg, book, _ = asymmetric_network(17)
    L, K = cfg.num_cells, cfg.users_per_cell
    gram = book.gram
    expected = np.empty((L, K))
    for l in range(L):
        for k in range(K):
            acc = cfg.uplink_noise_power
            for i in range(L):
                for j in range(K):
                    acc += gram[i * K + j, l * K + k] ** 2 * cfg.xi_squared[i, j, l]
            expected[l, k] = acc
    assert np.max(np.abs(compute_alpha(book, cfg) - expected)) < 1e-12


def test_sinr_matches_loop_oracle(asymmetric_network):
    cfg, book, power = asymmetric_network(18)
    L, K = cfg.num_cells, cfg.users_per_cell
    gram, xi2, beta = book.gram, cfg.xi_squared, cfg.beta
    P, alpha = power.power, power.alpha
    M = 150
    theta_m = np.empty((L, K))
    theta_inf = np.empty((L, K))
    for l in range(L):
        for k in range(K):
            interf = 0.0
            pbar = cfg.downlink_noise_power
            for m in range(L):
                for n in range(K):
                    pbar += beta[l, k, m] * P[m, n]
                    if (m, n) == (l, k):
                        continue
                    interf += (
                        gram[l * K + k, m * K + n] ** 2
                        * xi2[l, k, m] * beta[l, k, m] * P[m, n] / alpha[m, n]
                    )
            num = beta[l, k, l] * P[l, k]
            theta_m[l, k] = num / (alpha[l, k] * interf + alpha[l, k] / M * pbar)
            theta_inf[l, k] = num / (alpha[l, k] * interf)
    assert np.max(np.abs(sinr_finite(book, power, cfg, M).theta - theta_m)) < 1e-12
    assert np.max(np.abs(sinr_asymptotic(book, power, cfg).theta - theta_inf)) < 1e-10


def test_min_antennas_matches_loop_oracle(asymmetric_network):
    cfg, book, power = asymmetric_network(19)
    mu = 0.85
    per_user, network = min_antennas(book, power, cfg, mu)
    asy = sinr_asymptotic(book, power, cfg).theta
    # independent check through the satisfaction-ratio definition
    for (l, k), m in np.ndenumerate(per_user):
        at_m = sinr_finite(book, power, cfg, int(m)).theta[l, k] / asy[l, k]
        assert at_m >= mu - 1e-9
        if m > 1:
            below = sinr_finite(book, power, cfg, int(m) - 1).theta[l, k] / asy[l, k]
            assert below < mu + 1e-9


class TestMinAntennas:
    def test_mu_closure(self, designed, table1):
        book, targets, _, power = designed
        mu = 0.9
        per_user, network = min_antennas(book, power, table1.config, mu)
        asy = sinr_asymptotic(book, power, table1.config).theta
        for (l, k), m in np.ndenumerate(per_user):
            theta = sinr_finite(book, power, table1.config, int(m)).theta[l, k]
            assert theta / asy[l, k] >= mu - 1e-6
        assert network == per_user.max()

    def test_tiny_mu_gives_single_antenna(self, designed, table1):
        book, _, _, power = designed
        per_user, network = min_antennas(book, power, table1.config, 1e-9)
        assert network == 1 and np.all(per_user == 1)

    def test_mu_validation(self, designed, table1):
        book, _, _, power = designed
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                min_antennas(book, power, table1.config, bad)

    def test_closed_forms_match_generic(self, table1):
        cfg = table1.config
        for maker, closed in (
            (wbe_pilots, min_antennas_wbe_closed_form),
            (fos_pilots, min_antennas_fos_closed_form),
        ):
            book, meta = maker(4, 3, 2)
            scheme = "wbe" if maker is wbe_pilots else "fos"
            power = allocate_power(compute_alpha(book, cfg), table1.targets, scheme)
            for mu in (0.5, 0.9, 0.99):
                per_user, network = min_antennas(book, power, cfg, mu)
                cf_user, cf_network = closed(power, cfg, mu, meta)
                assert np.max(np.abs(per_user - cf_user)) <= 1
                assert abs(network - cf_network) <= 1
