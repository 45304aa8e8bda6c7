from functools import lru_cache
from math import factorial
from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from scipy.signal import fftconvolve

from . import InputError
from .models import CoeffSeq, GammaElement, GridFunction

Norm = Callable[[CoeffSeq], float]
Projection = Callable[[CoeffSeq, int], CoeffSeq]


class WindowError(InputError):
    pass


def coeffs_from_samples(h: GridFunction, N: int) -> CoeffSeq:
    S = h.sample_count
    if S < 4 * N + 4:
        raise WindowError("window larger than sampling allows")
    spectrum = np.fft.fft(h.samples) / S
    return CoeffSeq(spectrum[np.arange(-N, N + 1) % S])


def samples_from_coeffs(a: CoeffSeq, S: int) -> GridFunction:
    if S < 2 * a.half_width + 2:
        raise WindowError("window larger than sampling allows")
    spectrum = np.zeros(S, dtype=complex)
    spectrum[a.indices % S] = a.entries
    return GridFunction(np.fft.ifft(spectrum) * S)


def partial_sum(a: CoeffSeq, d: int) -> CoeffSeq:
    """Degree-d partial Fourier sum, on the window of `a`."""
    N = a.half_width
    entries = np.zeros_like(a.entries)
    if d >= 0:
        lo, hi = max(N - d, 0), min(N + d, 2 * N)
        entries[lo : hi + 1] = a.entries[lo : hi + 1]
    return CoeffSeq(entries)


def reflect(a: CoeffSeq) -> CoeffSeq:
    """c_n -> c_{-n}, the coefficients of h(1 - t)."""
    return CoeffSeq(a.entries[::-1])


def entrywise_product(a: CoeffSeq, b: CoeffSeq) -> CoeffSeq:
    x, y = a.aligned(b)
    return CoeffSeq(x * y)


def entrywise_power(a: CoeffSeq, k: int) -> CoeffSeq:
    return CoeffSeq(a.entries**k)


def entrywise_sin(a: CoeffSeq) -> CoeffSeq:
    return CoeffSeq(np.sin(a.entries))


def l1_norm(a: CoeffSeq, S: Optional[int] = None) -> Tuple[float, float]:
    """
    Quadrature estimate of the L1 norm of the function with coefficients
    `a`, returned together with the quadrature step.
    """
    if S is None:
        S = max(4096, 1 << int(np.ceil(np.log2(8 * a.half_width + 8))))
    samples = samples_from_coeffs(a, S).samples
    return float(np.mean(np.abs(samples))), 1.0 / S


@lru_cache(maxsize=128)
def moment_kernel(k: int, J: int) -> np.ndarray:
    """
    mu_k(j) = e_j((2t - 1)^k) for |j| <= J. The integration-by-parts
    recursion is used where pi |j| > k; the remaining entries come from
    Gauss-Legendre quadrature, which is exact to rounding there.
    """
    j = np.arange(-J, J + 1)
    mu = (j == 0).astype(complex)
    nonzero = j != 0
    jn = j[nonzero]
    for q in range(1, k + 1):
        step = np.empty_like(mu)
        step[nonzero] = -(1 - (-1) ** q) / (2j * np.pi * jn) + q / (
            1j * np.pi * jn
        ) * mu[nonzero]
        step[~nonzero] = 1 / (q + 1) if q % 2 == 0 else 0
        mu = step
    unstable = (np.abs(j) * np.pi <= k + 1) & nonzero
    if k > 0 and unstable.any():
        nodes, weights = leggauss(64)
        ju = j[unstable]
        # int_0^1 (2t-1)^k e^{-2 pi i j t} dt with s = 2t - 1
        phase = np.exp(-1j * np.pi * np.outer(ju, nodes + 1))
        mu[unstable] = 0.5 * phase @ (weights * nodes**k)
    mu.setflags(write=False)
    return mu


def m_power(a: CoeffSeq, k: int, N_out: Optional[int] = None) -> CoeffSeq:
    """Coefficients of M^k f on the window N_out, M being multiplication by i(2t - 1)."""
    if k == 0:
        return a if N_out is None else a.resized(N_out)
    N = a.half_width
    N_out = N if N_out is None else N_out
    kernel = moment_kernel(k, N_out + N)
    full = fftconvolve(a.entries, kernel)
    return CoeffSeq((1j**k) * full[2 * N : 2 * N + 2 * N_out + 1])


def apply_M(a: CoeffSeq, pad: Optional[int] = None) -> CoeffSeq:
    N = a.half_width
    pad = N // 2 if pad is None else pad
    out = m_power(a, 1, N + pad)
    # |Mf|^2 = <(2t - 1)^2 f, f> is available exactly on the input window
    exact_sq = -float(np.vdot(a.entries, m_power(a, 2, N).entries).real)
    discarded = np.sqrt(max(exact_sq - out.norm() ** 2, 0.0))
    logger.debug(f"apply_M: N={N} pad={pad} discarded l2 mass {discarded:.3e}")
    return out


def gamma_from_f(f: CoeffSeq, K: int) -> GammaElement:
    if K < 1:
        raise InputError("K must be at least 1")
    return GammaElement([m_power(f, k) for k in range(K + 1)])


def norm_gamma(gamma: GammaElement, norm: Optional[Norm] = None) -> float:
    norm = norm or CoeffSeq.norm
    terms = gamma.terms
    return norm(terms[0]) + sum(
        norm(a) / factorial(k - 1) for k, a in enumerate(terms) if k >= 1
    )


def reduce_gamma(
    gamma: GammaElement,
    k0: int,
    d: int,
    project: Optional[Projection] = None,
) -> Tuple[GammaElement, List[CoeffSeq]]:
    """
    Subtracts a degree-d trigonometric polynomial p_k from every a_k with
    k <= k0. Returns the reduced element and the polynomials p_0..p_k0.
    """
    if k0 > gamma.order:
        raise InputError(f"k0 = {k0} exceeds the Gamma order {gamma.order}")
    project = project or partial_sum
    polynomials = [project(gamma[k], d) for k in range(k0 + 1)]
    return subtract_polynomials(gamma, polynomials), polynomials


def subtract_polynomials(
    gamma: GammaElement, polynomials: List[CoeffSeq]
) -> GammaElement:
    terms = gamma.terms
    for k, p in enumerate(polynomials):
        terms[k] = terms[k] - p.resized(gamma.half_width)
    return GammaElement(terms)
