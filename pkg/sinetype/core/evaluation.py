from math import comb, factorial
from typing import Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import InputError
from .models import CoeffSeq, SineType

MAX_ORDER = 8
CHUNK = 2048
TAYLOR_TERMS = 30

ComplexLike = Union[complex, np.ndarray]


class DegenerateLeadingTerm(InputError):
    pass


class DerivativeOrderError(InputError):
    pass


def normalize(m_minus: complex, m_plus: complex, f_raw: CoeffSeq) -> SineType:
    """
    Brings m_- e^{-iz} + m_+ e^{iz} + int_{-1}^{1} f(t) e^{izt} dt, with
    f(t) = sum_n b_n e^{i pi n t}, to the normalized form. The zeros of
    the result are the zeros of the original shifted by -alpha.
    """
    if m_minus == 0 or m_plus == 0:
        raise DegenerateLeadingTerm("degenerate leading term")
    alpha = np.log(-complex(m_minus) / complex(m_plus)) / 2j
    scale = 2j * complex(m_plus) * np.exp(1j * alpha)
    h = (2 / scale) * to_symmetric_coeffs(f_raw).entries
    return SineType(CoeffSeq(h), complex(alpha), complex(m_minus), complex(m_plus))


def to_symmetric_coeffs(g: CoeffSeq) -> CoeffSeq:
    return CoeffSeq(np.where(g.indices % 2, -1, 1) * g.entries)


def _sinc_derivative(h: np.ndarray, order: int, delta_pole: float) -> np.ndarray:
    """order-th derivative of sin(h)/h."""
    out = np.empty_like(h)
    if order == 0:
        near = np.abs(h) < delta_pole
        h2 = h[near] ** 2
        acc = np.zeros_like(h2)
        for m in range(5, -1, -1):
            acc = (-1) ** m / factorial(2 * m + 1) + h2 * acc
        out[near] = acc
        far = ~near
        out[far] = np.sin(h[far]) / h[far]
        return out

    near = np.abs(h) < 1 + order / 2
    hn = h[near]
    m0 = (order + 1) // 2
    acc = np.zeros_like(hn)
    for m in range(m0 + TAYLOR_TERMS - 1, m0 - 1, -1):
        coeff = (-1) ** m / (factorial(2 * m - order) * (2 * m + 1))
        acc = coeff + hn * hn * acc
    out[near] = acc * hn ** (2 * m0 - order)

    far = ~near
    hf = h[far]
    total = np.zeros_like(hf)
    for i in range(order + 1):
        total += (
            comb(order, i)
            * np.sin(hf + (order - i) * np.pi / 2)
            * (-1) ** i
            * factorial(i)
            / hf ** (i + 1)
        )
    out[far] = total
    return out


def transform(
    coeffs: CoeffSeq, w: ComplexLike, order: int = 0, delta_pole: float = 1e-2
) -> ComplexLike:
    """
    order-th derivative of sin(w) sum_n c_n / (w + pi n), summed as
    sum_n (-1)^n c_n s(w + pi n) with s(h) = sin(h)/h, which is entire.
    """
    scalar = np.ndim(w) == 0
    points = np.atleast_1d(np.asarray(w, dtype=complex)).ravel()
    active = np.flatnonzero(coeffs.entries)
    n = coeffs.indices[active]
    weights = np.where(n % 2, -1, 1) * coeffs.entries[active]
    out = np.zeros(points.size, dtype=complex)
    if n.size:
        for start in range(0, points.size, CHUNK):
            block = points[start : start + CHUNK]
            h = block[:, None] + np.pi * n[None, :]
            out[start : start + CHUNK] = (
                _sinc_derivative(h, order, delta_pole) @ weights
            )
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(w))


def evaluate(F: SineType, z: ComplexLike, delta_pole: float = 1e-2) -> ComplexLike:
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    value = np.sin(z) + transform(F.f_coeffs, z + F.alpha, 0, delta_pole)
    return complex(value) if np.ndim(value) == 0 else value


def evaluate_derivative(F: SineType, z: ComplexLike, order: int) -> ComplexLike:
    if not 0 <= order <= MAX_ORDER:
        raise DerivativeOrderError(
            f"derivative order {order} outside 0..{MAX_ORDER}"
        )
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    value = np.sin(z + order * np.pi / 2) + transform(F.f_coeffs, z + F.alpha, order)
    return complex(value) if np.ndim(value) == 0 else value


def evaluate_by_quadrature(
    F: SineType, z: ComplexLike, order: int = 0, nodes: int = 256
) -> ComplexLike:
    """
    Direct Gauss-Legendre quadrature of
    sin^(j)(z) + i^j int_0^1 f(t) (2t - 1)^j e^{i(z + alpha)(2t - 1)} dt.
    """
    s, weights = leggauss(nodes)
    density = F.f_coeffs.at((s + 1) / 2) * weights * (1j * s) ** order / 2
    w = np.atleast_1d(np.asarray(z, dtype=complex)) + F.alpha
    value = np.sin(w - F.alpha + order * np.pi / 2) + np.exp(1j * np.outer(w, s)) @ density
    if np.ndim(z) == 0:
        return complex(value[0])
    return value.reshape(np.shape(z))
