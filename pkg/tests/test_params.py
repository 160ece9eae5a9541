import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from henonlab.params import (
    AdmissibilityError,
    DomainError,
    Params,
    admissible,
    critical_exponent,
    hardy_constant,
    normalization_constant,
    power_symbol,
    sobolev_exponent,
    sphere_measure,
    subcritical_exponent_bound,
)

mp.mp.dps = 40


def mp_hardy(N, s):
    return float(2 ** (2 * s) * (mp.gamma((N + 2 * s) / 4) / mp.gamma((N - 2 * s) / 4)) ** 2)


def test_critical_exponent_values():
    assert critical_exponent(3, 0.5, 0) == 2.0
    assert critical_exponent(3, 0.5, 1) == 3.0
    assert critical_exponent(3, 1, 0) == 5.0  # classical critical exponent


def test_critical_exponent_monotone():
    alphas = np.linspace(-0.4, 2.0, 7)
    ss = np.linspace(0.3, 0.9, 7)
    for s in ss:
        vals = [critical_exponent(3, s, a) for a in alphas]
        assert np.all(np.diff(vals) > 0)
    for a in alphas:
        vals = [critical_exponent(3, s, a) for s in ss]
        assert np.all(np.diff(vals) > 0)


def test_admissible_examples():
    assert admissible(3, 0.25, 3) is False  # bound is 2s(N-1)/(1-2s) = 2
    assert admissible(3, 0.75, 3) is True  # no upper bound at s >= 1/2
    assert admissible(3, 0.5, -1.0001) is False  # violates alpha > -2s
    assert admissible(3, 1.0, 5.0) is True
    assert admissible(1, 0.75, 0.0) is False  # N <= 2s


def test_hardy_constant_values():
    assert hardy_constant(3, 0.5) == pytest.approx(2 / np.pi, rel=1e-14)
    assert hardy_constant(3, 1 - 1e-9) == pytest.approx(0.25, rel=1e-6)
    assert hardy_constant(2, 0.5) == pytest.approx(mp_hardy(2, 0.5), rel=1e-13)
    assert hardy_constant(4, 0.9) == pytest.approx(mp_hardy(4, 0.9), rel=1e-13)
    with pytest.raises(DomainError):
        hardy_constant(1, 0.75)


def test_hardy_monotone_continuous_in_s():
    ss = np.linspace(0.05, 0.999, 60)
    vals = np.array([hardy_constant(3, s) for s in ss])
    d = np.diff(vals)
    assert np.all(d < 0) or np.all(d > 0)  # monotone toward ((N-2)/2)^2
    assert vals[-1] == pytest.approx(0.25, abs=1e-3)
    assert np.max(np.abs(d)) < 0.05  # no jumps on this sampling


def test_power_symbol_examples():
    assert power_symbol(3, 0.5, 1.0) == pytest.approx(hardy_constant(3, 0.5), rel=1e-14)
    assert power_symbol(3, 0.5, 0.5) == pytest.approx(0.5, rel=1e-14)
    assert power_symbol(3, 0.5, 1e-8) == pytest.approx(0.0, abs=1e-7)


def test_power_symbol_symmetry_and_max():
    for (N, s) in [(3, 0.5), (3, 0.75), (2, 0.3), (4, 0.9)]:
        band = N - 2 * s
        mus = np.linspace(0.05 * band, 0.95 * band, 19)
        for mu in mus:
            assert power_symbol(N, s, mu) == pytest.approx(
                power_symbol(N, s, band - mu), rel=1e-12
            )
        vals = [power_symbol(N, s, mu) for mu in mus]
        assert max(vals) <= hardy_constant(N, s) * (1 + 1e-12)
        assert power_symbol(N, s, band / 2) == pytest.approx(hardy_constant(N, s), rel=1e-13)
    with pytest.raises(DomainError):
        power_symbol(3, 0.5, 2.5)
    with pytest.raises(DomainError):
        power_symbol(3, 0.5, -0.1)


def test_normalization_constant_1d_half():
    assert normalization_constant(1, 0.5) == pytest.approx(1 / np.pi, rel=1e-14)


def test_normalization_matches_laplacian_on_gaussian():
    # (-Delta)^s e^{-|x|^2} at 0 = C_{N,s} omega_{N-1} int (1-e^{-r^2}) r^{-1-2s} dr,
    # which must approach -Delta e^{-|x|^2}(0) = 2N as s -> 1.
    for N in (1, 3):
        for s, tol in ((0.99, 0.05), (0.999, 0.005)):
            # split at r = 1: QUADPACK integrates the algebraic endpoint
            # weight r^{1-2s} exactly; the outer part decays like r^{-1-2s}
            inner, _ = quad(
                lambda r: -np.expm1(-(r**2)) / r**2 if r > 0 else 1.0,
                0, 1, weight="alg", wvar=(1 - 2 * s, 0),
            )
            outer, _ = quad(lambda r, s=s: (1 - np.exp(-(r**2))) * r ** (-1 - 2 * s), 1, 60)
            val = normalization_constant(N, s) * sphere_measure(N - 1) * (inner + outer)
            assert val == pytest.approx(2 * N, rel=tol)


def test_loggamma_accuracy_and_identities(rng):
    xs = rng.uniform(1e-3, 50.0, 200)
    for x in xs:
        assert gammaln(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-12, abs=1e-12)
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x) on (0,1)
    for x in rng.uniform(0.05, 0.95, 50):
        lhs = gammaln(x) + gammaln(1 - x)
        rhs = np.log(np.pi / np.sin(np.pi * x))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    # duplication: Gamma(2x) = 2^{2x-1} Gamma(x) Gamma(x+1/2) / sqrt(pi)
    for x in rng.uniform(0.05, 24.0, 50):
        lhs = gammaln(2 * x)
        rhs = (2 * x - 1) * np.log(2.0) + gammaln(x) + gammaln(x + 0.5) - 0.5 * np.log(np.pi)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-11)


def test_params_validation():
    par = Params(N=3, s=0.5, alpha=0.0)
    assert par.p == 2.0
    assert par.decay_rate == 1.0
    with pytest.raises(AdmissibilityError):
        Params(N=3, s=0.25, alpha=3.0)
    with pytest.raises(AdmissibilityError):
        Params(N=3, s=0.5, alpha=0.0, p=0.5)
    with pytest.raises(AdmissibilityError):
        Params(N=3, s=0.25, alpha=-0.2, p=3.5)  # above (1+2s)/(1-2s) = 3
    assert subcritical_exponent_bound(0.25) == pytest.approx(3.0)
    assert subcritical_exponent_bound(0.5) == np.inf
    assert sobolev_exponent(3, 0.5) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        sobolev_exponent(1, 0.5)


def test_params_with_update():
    par = Params(N=3, s=0.6, alpha=0.0, p=3.0)
    par2 = par.with_(s=0.8)
    assert par2.p == 3.0 and par2.s == 0.8
