"""Problem data for the critical fractional Henon equation and its closed-form constants.

Everything here is a pure function of (N, s, alpha, p, mu).  The sharp Hardy
constant and the power symbol are evaluated through log-Gamma to stay finite
far into the parameter range; both are cross-checked elsewhere against an
independent quadrature route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


class AdmissibilityError(ValueError):
    """Parameters violate the standing assumptions of the problem."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a constant."""


def critical_exponent(N: int, s: float, alpha: float = 0.0) -> float:
    """Critical exponent (N + 2s + 2*alpha) / (N - 2s)."""
    if N <= 2 * s:
        raise DomainError(f"critical exponent needs N > 2s, got N={N}, s={s}")
    return (N + 2.0 * s + 2.0 * alpha) / (N - 2.0 * s)


def admissible(N: int, s: float, alpha: float) -> bool:
    """Standing assumptions on (N, s, alpha).

    Requires N > 2s and alpha > -2s; for s < 1/2 additionally
    alpha < 2s(N-1)/(1-2s).  The upper bound disappears at s >= 1/2.
    """
    if N < 1 or not (0.0 < s <= 1.0):
        return False
    if N <= 2.0 * s:
        return False
    if alpha <= -2.0 * s:
        return False
    if s < 0.5 and alpha >= 2.0 * s * (N - 1) / (1.0 - 2.0 * s):
        return False
    return True


def subcritical_exponent_bound(s: float) -> float:
    """Upper bound on p for the 1D transformed equation: (1+2s)/(1-2s), inf for s >= 1/2."""
    if s >= 0.5:
        return np.inf
    return (1.0 + 2.0 * s) / (1.0 - 2.0 * s)


def sobolev_exponent(N: int, s: float) -> float:
    """2*_s = 2N/(N-2s)."""
    if N <= 2 * s:
        raise DomainError(f"2*_s needs N > 2s, got N={N}, s={s}")
    return 2.0 * N / (N - 2.0 * s)


def hardy_constant(N: int, s: float) -> float:
    """Optimal constant of the fractional Hardy inequality.

    2^{2s} * Gamma^2((N+2s)/4) / Gamma^2((N-2s)/4); tends to ((N-2)/2)^2
    as s -> 1 for N >= 3.
    """
    if N <= 2 * s:
        raise DomainError(f"Hardy constant needs N > 2s, got N={N}, s={s}")
    return 2.0 ** (2 * s) * np.exp(2.0 * (gammaln((N + 2 * s) / 4.0) - gammaln((N - 2 * s) / 4.0)))


def power_symbol(N: int, s: float, mu: float) -> float:
    """Eigenvalue of (-Delta)^s on |x|^{-mu}, for 0 < mu < N - 2s.

    2^{2s} Gamma((mu+2s)/2) Gamma((N-mu)/2) / (Gamma(mu/2) Gamma((N-mu-2s)/2)).
    Symmetric about the self-dual power mu = (N-2s)/2, where it equals the
    Hardy constant; vanishes as mu -> 0 (constants are annihilated).
    """
    if not (0.0 < mu < N - 2.0 * s):
        raise DomainError(f"power symbol needs 0 < mu < N-2s, got mu={mu}, N={N}, s={s}")
    return 2.0 ** (2 * s) * np.exp(
        gammaln((mu + 2 * s) / 2.0)
        + gammaln((N - mu) / 2.0)
        - gammaln(mu / 2.0)
        - gammaln((N - mu - 2 * s) / 2.0)
    )


def normalization_constant(N: int, s: float) -> float:
    """C_{N,s} in the normalization with Fourier symbol |xi|^{2s}.

    C_{N,s} = 4^s Gamma(N/2 + s) s / (pi^{N/2} Gamma(1-s)).  Pinned
    operationally by the requirement that the integral route to the Hardy
    constant reproduces the Gamma formula.
    """
    if not (0.0 < s < 1.0):
        raise DomainError(f"normalization constant needs 0 < s < 1, got s={s}")
    return 4.0**s * s * np.exp(gammaln(N / 2.0 + s) - gammaln(1.0 - s)) / np.pi ** (N / 2.0)


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere S^n in R^{n+1}; S^0 = {+-1} has measure 2."""
    if n < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {n}")
    return 2.0 * np.pi ** ((n + 1) / 2.0) / np.exp(gammaln((n + 1) / 2.0))


@dataclass(frozen=True)
class Params:
    """Problem data (N, s, alpha, p); p defaults to the critical exponent.

    Invariants enforced at construction: N > 2s, the alpha window, p > 1,
    and p below the 1D critical exponent when s < 1/2.
    """

    N: int
    s: float
    alpha: float = 0.0
    p: float | None = None

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise AdmissibilityError(f"s must lie in (0,1), got {self.s}")
        if not admissible(self.N, self.s, self.alpha):
            raise AdmissibilityError(
                f"(N={self.N}, s={self.s}, alpha={self.alpha}) violates the standing assumptions"
            )
        if self.p is None:
            object.__setattr__(self, "p", critical_exponent(self.N, self.s, self.alpha))
        if self.p <= 1.0:
            raise AdmissibilityError(f"p must exceed 1, got {self.p}")
        if self.p >= subcritical_exponent_bound(self.s):
            raise AdmissibilityError(
                f"p={self.p} is not below (1+2s)/(1-2s)={subcritical_exponent_bound(self.s)} for s={self.s}"
            )

    @property
    def p_critical(self) -> float:
        return critical_exponent(self.N, self.s, self.alpha)

    @property
    def hardy(self) -> float:
        return hardy_constant(self.N, self.s)

    @property
    def decay_rate(self) -> float:
        """Log-variable decay rate (N-2s)/2 of every profile of interest."""
        return (self.N - 2.0 * self.s) / 2.0

    @property
    def normalization(self) -> float:
        return normalization_constant(self.N, self.s)

    def with_(self, **kw) -> "Params":
        d = {"N": self.N, "s": self.s, "alpha": self.alpha, "p": self.p}
        d.update(kw)
        return Params(**d)
