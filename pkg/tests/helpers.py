from math import factorial

import numpy as np
from numpy.polynomial.legendre import leggauss

from sinetype.core.fourier import l1_norm
from sinetype.core.models import CoeffSeq, GammaElement


def random_coeffs(rng, N: int, degree: int = 8, norm: float = 1.0) -> CoeffSeq:
    degree = min(degree, N)
    entries = np.zeros(2 * N + 1, dtype=complex)
    span = slice(N - degree, N + degree + 1)
    entries[span] = rng.standard_normal(2 * degree + 1) + 1j * rng.standard_normal(
        2 * degree + 1
    )
    return CoeffSeq(entries * norm / np.linalg.norm(entries))


def random_l1_small(rng, N: int, bound: float = 1 / 8, degree: int = 8) -> CoeffSeq:
    f = random_coeffs(rng, N, degree)
    l1, _ = l1_norm(f)
    return f * (0.9 * bound / l1)


def random_gamma(rng, K: int, N: int, size: float) -> GammaElement:
    """A random Gamma element with norm_gamma equal to `size`."""
    terms = [random_coeffs(rng, N, degree=N) for _ in range(K + 1)]
    weights = [1.0] + [1.0 / factorial(k - 1) for k in range(1, K + 1)]
    total = sum(weights)
    return GammaElement([t * (size / total) for t in terms])


def original_value(m_minus, m_plus, b: CoeffSeq, z, nodes: int = 256):
    """m_- e^{-iz} + m_+ e^{iz} + int_{-1}^{1} f(t) e^{izt} dt, f = sum b_n e^{i pi n t}."""
    t, weights = leggauss(nodes)
    density = b.at(t / 2) * weights
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    values = m_minus * np.exp(-1j * z) + m_plus * np.exp(1j * z)
    return values + np.exp(1j * np.outer(z, t)) @ density


def series_sin(x, terms: int = 25):
    acc = np.zeros_like(x)
    for k in range(terms):
        acc = acc + (-1) ** k * x ** (2 * k + 1) / float(factorial(2 * k + 1))
    return acc
