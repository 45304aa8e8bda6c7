from typing import List, NamedTuple, Optional

import numpy as np
from loguru import logger
from scipy.optimize import linear_sum_assignment

from ..settings import SolverConfig, get_space, settings
from . import InputError, NumericalFailure
from .fourier import (
    gamma_from_f,
    l1_norm,
    norm_gamma,
    reduce_gamma,
    reflect,
    subtract_polynomials,
)
from .models import CoeffSeq, GammaElement, SineType, ZeroSet
from .oracle import localize_all

ROUNDOFF_STEP = 1e-12
LIPSCHITZ_SLACK = 1e-10
CERTIFIED_L1 = 1 / 8


class GammaNormExceeded(NumericalFailure):
    pass


class ContractionViolated(NumericalFailure):
    pass


class PatchWindowExhausted(NumericalFailure):
    pass


class LipschitzViolated(NumericalFailure):
    pass


class BranchPoint(NumericalFailure):
    def __init__(self, message: str, s: float):
        super().__init__(message)
        self.s = s


class FixedPoint(NamedTuple):
    x: CoeffSeq
    ratios: List[float]
    iterations: int


class Reduction(NamedTuple):
    k0: int
    d: int
    polynomials: List[CoeffSeq]


class ForwardResult(NamedTuple):
    g: CoeffSeq
    zeros: ZeroSet
    n1: int
    certified: bool
    contraction_ratios: List[float]
    # x solves the reduced equation; gamma is the reduced element it was solved for
    x: CoeffSeq
    gamma: GammaElement
    reduction: Reduction

    def to_dict(self) -> dict:
        return {
            "g": self.g.to_dict(),
            "zeros": self.zeros.to_dict(),
            "n1": self.n1,
            "certified": self.certified,
            "contraction_ratios": [float(r) for r in self.contraction_ratios],
        }


def _taylor(stack: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_k a_k x^k / k!, by Horner."""
    acc = stack[-1].copy()
    for k in range(stack.shape[0] - 2, -1, -1):
        acc = stack[k] + x * acc / (k + 1)
    return acc


def apply_G(gamma: GammaElement, x: CoeffSeq) -> CoeffSeq:
    """x - sin x - sum_k a_k x^k / k!; fixed points solve the zero equation."""
    xs = x.resized(gamma.half_width).entries
    return CoeffSeq(xs - np.sin(xs) - _taylor(gamma.stack, xs))


def solve_fixed_point(
    gamma: GammaElement, cfg: Optional[SolverConfig] = None
) -> FixedPoint:
    cfg = cfg or settings
    space = get_space(cfg)
    size = norm_gamma(gamma, space.norm)
    if size > space.r0:
        raise GammaNormExceeded("gamma norm exceeds r0")

    x = CoeffSeq.zeros(gamma.half_width)
    ratios: List[float] = []
    previous: Optional[float] = None
    for iteration in range(1, cfg.max_iter + 1):
        nxt = apply_G(gamma, x)
        step = space.norm(nxt - x)
        if previous is not None and previous > ROUNDOFF_STEP:
            ratio = step / previous
            ratios.append(ratio)
            if ratio > cfg.contraction_max:
                raise ContractionViolated(
                    f"contraction violated: ratio {ratio:.3f} at iteration {iteration}"
                )
        x = nxt
        logger.trace(f"fixed point iteration {iteration}: step {step:.3e}")
        if step <= cfg.fp_tol:
            logger.debug(
                f"fixed point after {iteration} iterations, |gamma| = {size:.4f}"
            )
            return FixedPoint(x, ratios, iteration)
        previous = step
    raise ContractionViolated(f"contraction violated: no convergence in {cfg.max_iter}")


def choose_reduction(gamma: GammaElement, cfg: SolverConfig) -> Reduction:
    space = get_space(cfg)
    if norm_gamma(gamma, space.norm) < cfg.gamma_target:
        return Reduction(k0=-1, d=0, polynomials=[])
    cap = cfg.N // 2
    k0, d = min(cfg.k0, gamma.order), min(cfg.d, cap)
    while True:
        reduced, polynomials = reduce_gamma(gamma, k0, d, space.project)
        size = norm_gamma(reduced, space.norm)
        logger.debug(f"reduction k0={k0} d={d}: |gamma~| = {size:.4f}")
        if size < cfg.gamma_target:
            return Reduction(k0, d, polynomials)
        if d >= cap and k0 >= gamma.order:
            raise GammaNormExceeded("gamma norm exceeds r0")
        d, k0 = min(2 * d, cap), min(k0 + 1, gamma.order)


def zero_equation_residual(f: CoeffSeq, zeros: ZeroSet, K: int) -> np.ndarray:
    """|sin zeta_n + sum_k e_{-n}(M^k f) zeta_n^k / k!| for |n| <= n_max."""
    n_max = zeros.n_max
    window = max(f.half_width, n_max)
    gamma = gamma_from_f(f.resized(window), K)
    stack = np.array([reflect(a).entries for a in gamma.terms])
    stack = stack[:, window - n_max : window + n_max + 1]
    zeta = zeros.zeta
    return np.abs(np.sin(zeta) + _taylor(stack, zeta))


def _follow(zeros: ZeroSet, previous: ZeroSet) -> ZeroSet:
    """Relabels low indices so that each zero keeps the index of its predecessor."""
    m = min(max(zeros.n0, previous.n0), zeros.n_max, previous.n_max)
    if m == 0:
        return zeros
    new = np.array([zeros[n] for n in range(-m, m + 1)])
    old = np.array([previous[n] for n in range(-m, m + 1)])
    rows, cols = linear_sum_assignment(np.abs(new[:, None] - old[None, :]))
    relabelled = zeros.zeros.copy()
    for r, c in zip(rows, cols):
        relabelled[c - m + zeros.n_max] = new[r]
    return ZeroSet(zeros.n0, relabelled, zeros.clusters, zeros.certified_m)


def _patch_radius(
    model: CoeffSeq, zeros: ZeroSet, start: int, cfg: SolverConfig
) -> int:
    n_max = zeros.n_max
    idx = zeros.indices
    diff = np.abs(model.resized(n_max).entries - zeros.zeta)
    bad = np.abs(idx[diff > cfg.patch_tol])
    n1 = max(start, int(bad.max()) if bad.size else 0)
    if n1 >= n_max or n1 > cfg.N // 2:
        raise PatchWindowExhausted(
            f"patch window exhausted: n1 = {n1}, n_max = {n_max}, N = {cfg.N}"
        )
    return min(n1 + cfg.n1_margin, n_max)


def forward_map(
    f: CoeffSeq,
    cfg: Optional[SolverConfig] = None,
    reduction: Optional[Reduction] = None,
    previous: Optional[ZeroSet] = None,
) -> ForwardResult:
    """
    Zero data of F(z) = sin z + int_0^1 f(t) e^{iz(2t-1)} dt as the
    coefficients of g: z_n = pi n + e_n(g). The fixed point of the
    (reduced) zero equation models the tail; indices up to n1 are taken
    from the root oracle.
    """
    cfg = cfg or settings
    if f.half_width > cfg.N:
        raise InputError(f"f has window {f.half_width}, wider than N = {cfg.N}")
    f = f.resized(cfg.N)

    gamma = gamma_from_f(f, cfg.K)
    if reduction is None:
        reduction = choose_reduction(gamma, cfg)
    reduced = subtract_polynomials(gamma, reduction.polynomials)
    solution = solve_fixed_point(reduced, cfg)

    zeros = localize_all(SineType(f), cfg.n_max, cfg)
    if previous is not None:
        zeros = _follow(zeros, previous)

    # x_j solves the equation of the zero with index -j
    model = reflect(solution.x)
    n1 = _patch_radius(model, zeros, max(reduction.d, zeros.n0), cfg)
    entries = model.entries.copy()
    low = np.arange(-n1, n1 + 1)
    entries[low + cfg.N] = zeros.zeta[low + zeros.n_max]
    g = CoeffSeq(entries)

    l1, step = l1_norm(f)
    certified = l1 <= CERTIFIED_L1
    if not certified:
        logger.warning(f"|f|_L1 ~ {l1:.4f} (step {step:.1e}) > 1/8: result uncertified")
    logger.info(f"forward map: n0 = {zeros.n0}, n1 = {n1}, d = {reduction.d}")
    return ForwardResult(
        g, zeros, n1, certified, solution.ratios, solution.x, reduced, reduction
    )


def track_branch(
    f0: CoeffSeq, f1: CoeffSeq, steps: int, cfg: Optional[SolverConfig] = None
) -> List[CoeffSeq]:
    """
    g along f_s = f0 + s (f1 - f0), s = j / steps, with the reduction
    polynomials fixed from f0 and the low indices followed step by step.
    """
    cfg = cfg or settings
    if steps < 1:
        raise InputError("steps must be at least 1")
    space = get_space(cfg)

    current = forward_map(f0, cfg)
    _check_simple(current.zeros, 0.0)
    path = [current.g]
    for j in range(1, steps + 1):
        s = j / steps
        nxt = forward_map(
            f0 + s * (f1 - f0), cfg, reduction=current.reduction, previous=current.zeros
        )
        _check_simple(nxt.zeros, s)
        moved = space.norm(nxt.x - current.x)
        bound = 2 * norm_gamma(nxt.gamma - current.gamma, space.norm)
        if moved > bound + LIPSCHITZ_SLACK:
            raise LipschitzViolated(
                f"|dx| = {moved:.3e} exceeds 2|d gamma| = {bound:.3e} at s = {s}"
            )
        path.append(nxt.g)
        current = nxt
    return path


def _check_simple(zeros: ZeroSet, s: float) -> None:
    if any(mult > 1 for _, mult in zeros.clusters):
        raise BranchPoint(f"branch point at s = {s}", s)
