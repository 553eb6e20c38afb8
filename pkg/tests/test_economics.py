import math

import numpy as np
import pytest

from robsched import economics as ec
from robsched import queueing as q
from robsched.economics import EconomicParams
from robsched.errors import NonErgodic
from robsched.queueing import QueueParams

P = EconomicParams()


def test_params_validation():
    with pytest.raises(ValueError):
        EconomicParams(a=0)
    with pytest.raises(ValueError):
        EconomicParams(e_frac=1.2)
    with pytest.raises(ValueError):
        EconomicParams(alpha=1.0)
    with pytest.raises(ValueError):
        EconomicParams(deadline=-1)
    with pytest.raises(ValueError):
        EconomicParams(phi=0.55, alpha=2.0)
    assert EconomicParams.from_phi(0.55).alpha == pytest.approx(2.1)


def test_charge_expectation():
    big_d = EconomicParams(deadline=1e6)
    assert ec.charge_expectation(QueueParams(3, 2, 4), big_d) == pytest.approx(15.0)
    zero_d = EconomicParams(deadline=0.0)
    assert ec.charge_expectation(QueueParams(1, 2, 1), zero_d) == pytest.approx(7.5)
    qp = QueueParams(3, 2, 4)
    assert ec.charge_expectation(qp, P) == 15 * q.fw_exact(qp, 1.0)


def test_revenue():
    assert ec.revenue(QueueParams(3, 2, 4), EconomicParams(deadline=1e6)) == pytest.approx(60.0)
    qp = QueueParams(3, 2, 4)
    assert ec.revenue(qp, P) == pytest.approx(4 * 15 * q.fw_exact(qp, 1.0), rel=1e-15)
    with pytest.raises(ValueError):
        QueueParams(3, 2, 0)


def test_dynamic_power():
    assert ec.dynamic_power(1.0, P) == 2.0
    assert ec.dynamic_power(2.0, P) == pytest.approx(8.574187700290345, rel=1e-14)
    assert ec.dynamic_power(2.0, P) == pytest.approx(2 * math.exp(2.1 * math.log(2)), rel=1e-14)
    assert ec.dynamic_power(0.5, P) < ec.dynamic_power(1.0, P)


def test_cost_special_cases():
    qp = QueueParams(3, 2, 4)
    assert ec.cost(qp, EconomicParams(e_frac=0.0)) == pytest.approx(3 * (3 + 4))
    assert ec.cost(QueueParams(3, 2.5, 4), EconomicParams(e_frac=0.0)) == pytest.approx(21)
    e1 = ec.cost(qp, EconomicParams(e_frac=1.0))
    assert e1 == pytest.approx(3 * (3 + (2 / 3) * 2 * 2**2.1))


def test_cost_reference_point():
    # 3 * (3 + 1 * (0.7 * (2/3) * 2 * 2^2.1 + 4 * 0.3)), worked out by hand
    dyn = 0.7 * (2 / 3) * 8.574187700290345
    assert ec.cost(QueueParams(3, 2, 4), P) == pytest.approx(3 * (3 + dyn + 1.2), rel=1e-14)
    assert ec.cost(QueueParams(3, 2, 4), P) == pytest.approx(24.6038627804, rel=1e-10)


def test_profit_exact_breakdown():
    qp = QueueParams(3, 2, 4)
    pb = ec.profit_exact(qp, P)
    assert pb.profit == pb.revenue - pb.cost
    assert pb.revenue == ec.revenue(qp, P) and pb.cost == ec.cost(qp, P)
    assert 0 <= pb.revenue <= 4 * 15
    assert pb.profit == pytest.approx(31.7871963333, rel=1e-10)


def test_profit_exact_limit():
    econ = EconomicParams(deadline=1e6, e_frac=0.0)
    assert ec.profit_exact(QueueParams(3, 2, 4), econ).profit == pytest.approx(60 - 3 * (3 + 4))


def test_profit_has_interior_maximum_in_speed():
    # sweep the ergodic part of s in [0.5, 6] at m = 3
    ss = np.linspace(4 / 3 + 1e-3, 6, 400)
    g = np.array([ec.profit_exact(QueueParams(3, s, 4), P).profit for s in ss])
    i = int(np.argmax(g))
    assert 0 < i < len(ss) - 1


def test_profit_closed_reference_value():
    assert ec.profit_closed(3, 2, 4, P) == pytest.approx(32.4928153768, rel=1e-10)


def test_profit_closed_limit():
    econ = EconomicParams(deadline=1e6)
    m, s, lam = 3.4, 2.3, 4.0
    expect = lam * 15 - m * (3 + (0.7 * lam * s ** 1.1 * 2 / m + 4 * 0.3))
    assert ec.profit_closed(m, s, lam, econ) == pytest.approx(expect, rel=1e-13)


def test_profit_closed_decreases_for_large_speed():
    ss = np.linspace(4, 8, 50)
    assert np.all(np.diff(ec.profit_closed(3.0, ss, 4, P)) < 0)


def test_profit_closed_matches_exact_on_grid():
    for m in np.linspace(3, 4, 10):
        for s in np.linspace(2, 3, 10):
            exact = ec.profit_exact(QueueParams(m, s, 4), P).profit
            assert np.isclose(ec.profit_closed(m, s, 4, P), exact, rtol=0.05, atol=0.05)


def test_profit_closed_rejects_nonergodic():
    with pytest.raises(NonErgodic):
        ec.profit_closed(1, 2, 4, P)


def test_revenue_monotone_in_deadline():
    qp = QueueParams(3.3, 2.2, 4)
    r = [ec.revenue(qp, EconomicParams(deadline=d)) for d in np.linspace(0, 3, 30)]
    assert np.all(np.diff(r) >= 0)


@pytest.mark.parametrize("field", ["beta", "delta", "p_static", "xi"])
def test_cost_increasing_in_parameters(field):
    qp = QueueParams(3.5, 2.5, 4)
    base = getattr(P, field)
    vals = [ec.cost(qp, EconomicParams(**{field: base * f})) for f in (0.5, 1, 1.5, 2)]
    assert np.all(np.diff(vals) > 0)


def test_cost_increasing_in_m_and_s():
    for s in np.linspace(2, 3, 10):
        c = [ec.cost(QueueParams(m, s, 4), P) for m in np.linspace(3, 4, 10)]
        assert np.all(np.diff(c) > 0)
    for m in np.linspace(3, 4, 10):
        c = [ec.cost(QueueParams(m, s, 4), P) for s in np.linspace(2, 3, 10)]
        assert np.all(np.diff(c) > 0)


def test_closed_forms_finite_on_fine_grid():
    M, S = np.meshgrid(np.linspace(3, 4, 200), np.linspace(2, 3, 200))
    assert np.all(np.isfinite(ec.profit_closed(M, S, 4, P)))
    assert np.all(np.isfinite(q.mean_wait_approx(M, S, 4)))


def test_profit_positive_somewhere():
    M, S = np.meshgrid(np.linspace(3, 4, 20), np.linspace(2, 3, 20))
    assert np.max(ec.profit_closed(M, S, 4, P)) > 0
