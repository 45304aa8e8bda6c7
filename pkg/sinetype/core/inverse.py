from math import factorial
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from ..settings import SolverConfig, get_space, settings
from . import InputError, NumericalFailure
from .evaluation import evaluate, evaluate_derivative, transform
from .fourier import entrywise_sin, l1_norm, m_power, partial_sum, reflect
from .models import CoeffSeq, SineType, ZeroSet

MAX_NEUMANN_STEPS = 500
MIN_SEPARATION = np.pi / 6


class NeumannInversionError(InputError):
    pass


class InverseResidualExceeded(NumericalFailure):
    def __init__(self, message: str, residuals: Optional[List[float]] = None):
        super().__init__(message)
        self.residuals = residuals or []


class PatchSystemIllConditioned(NumericalFailure):
    pass


class InterpolationFailure(NumericalFailure):
    pass


class InverseResult(NamedTuple):
    f: CoeffSeq
    zeros: ZeroSet
    m: int
    eps: float
    alphas: List[complex]
    residuals: List[float]
    condition_number: float

    def to_dict(self) -> dict:
        return {
            "f": self.f.to_dict(),
            "m": self.m,
            "eps": self.eps,
            "alphas": [[a.real, a.imag] for a in self.alphas],
            "residuals": [float(r) for r in self.residuals],
            "condition_number": float(self.condition_number),
        }


def apply_Ag(g: CoeffSeq, f: CoeffSeq, K: int) -> CoeffSeq:
    """f + sum_{k=1}^{K} e(M^k f) g^k / k!, entrywise on the joint window."""
    N = max(g.half_width, f.half_width)
    gs = g.resized(N).entries
    out = f.resized(N).entries.copy()
    power = np.ones_like(gs)
    for k in range(1, K + 1):
        power = power * gs
        out += m_power(f, k, N).entries * power / factorial(k)
    return CoeffSeq(out)


def invert_Ag(
    g: CoeffSeq, h: CoeffSeq, tol: float, K: int, cfg: Optional[SolverConfig] = None
) -> CoeffSeq:
    cfg = cfg or settings
    space = get_space(cfg)
    if space.norm(g) > space.neumann_radius:
        raise NeumannInversionError("g too large for Neumann inversion")
    N = max(g.half_width, h.half_width)
    h = h.resized(N)
    f = h
    scale = max(1.0, space.norm(h))
    for step in range(1, MAX_NEUMANN_STEPS + 1):
        nxt = h - (apply_Ag(g, f, K) - f)
        update = space.norm(nxt - f)
        f = nxt
        if update <= tol * scale:
            logger.trace(f"Neumann series converged in {step} steps")
            break
    residual = space.norm(apply_Ag(g, f, K) - h)
    if residual > 2 * tol * scale:
        raise InverseResidualExceeded(
            f"inverse residual exceeded: |A_g f - h| = {residual:.3e}", [residual]
        )
    return f


def _prescribed(g: CoeffSeq, n_max: int) -> np.ndarray:
    n = np.arange(-n_max, n_max + 1)
    return np.pi * n + g.resized(n_max).entries


def _zero_residuals(F: SineType, z: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    return np.abs(evaluate(F, z, cfg.delta_pole)) * np.exp(-np.abs(z.imag))


def b_map(g: CoeffSeq, cfg: Optional[SolverConfig] = None) -> CoeffSeq:
    """
    The f whose zeros are pi n + e_n(g): f = -A^{-1}(sin g'), g' = g(1 - .),
    valid while |g| <= 1/2 and |g|_L1 < pi/2.
    """
    cfg = cfg or settings
    space = get_space(cfg)
    l1, step = l1_norm(g)
    if space.norm(g) > space.neumann_radius or l1 >= np.pi / 2:
        raise NeumannInversionError("g too large for Neumann inversion")
    mirrored = reflect(g)
    f = -invert_Ag(mirrored, entrywise_sin(mirrored), cfg.neumann_tol, cfg.K, cfg)

    residuals = _zero_residuals(SineType(f), _prescribed(g, cfg.n_max), cfg)
    if residuals.max() > cfg.res_tol:
        raise InverseResidualExceeded(
            f"inverse residual exceeded: {residuals.max():.3e} "
            f"(K = {cfg.K}, N = {g.half_width}, L1 step {step:.1e})",
            residuals.tolist(),
        )
    return f


def _within_margins(g: CoeffSeq, cfg: SolverConfig) -> bool:
    space = get_space(cfg)
    keep = 1 - cfg.norm_margin
    return (
        space.norm(g) <= keep * space.neumann_radius
        and l1_norm(g)[0] <= keep * np.pi / 2
    )


def choose_split(g: CoeffSeq, cfg: SolverConfig) -> int:
    """
    Smallest m whose tail g - S_m g keeps both norm margins and whose low
    zeros stay pi/6 away from the rest; -1 when no split is needed.
    """
    if _within_margins(g, cfg):
        return -1
    N = g.half_width
    large = np.abs(g.indices[np.abs(g.entries) >= np.pi / 2])
    m0 = int(large.max()) if large.size else 0
    z = _prescribed(g, N)
    for m in range(m0, N // 2 + 1):
        if not _within_margins(g - partial_sum(g, m), cfg):
            continue
        low, high = z[N - m : N + m + 1], np.concatenate([z[: N - m], z[N + m + 1 :]])
        if high.size and np.abs(low[:, None] - high[None, :]).min() < MIN_SEPARATION:
            continue
        return m
    raise InputError("no admissible split of g: prescribed zeros too far from pi n")


def _clusters(points: np.ndarray, tol: float) -> List[Tuple[complex, int]]:
    clusters: List[Tuple[complex, int]] = []
    for z in points:
        for k, (w, r) in enumerate(clusters):
            if abs(z - w) <= tol:
                clusters[k] = (w, r + 1)
                break
        else:
            clusters.append((complex(z), 1))
    return clusters


def inverse_map(
    g: CoeffSeq,
    cfg: Optional[SolverConfig] = None,
    m: Optional[int] = None,
    eps: Optional[float] = None,
) -> InverseResult:
    """
    The f for which F_f vanishes exactly at z_n = pi n + e_n(g). The tail of
    g goes through b_map; the 2m + 1 low zeros, multiplicities included,
    are imposed by the patch system.
    """
    cfg = cfg or settings
    space = get_space(cfg)
    N = g.half_width
    n_max = cfg.n_max
    m = choose_split(g, cfg) if m is None else m
    tail = g - partial_sum(g, m)
    base = b_map(tail, cfg)
    G = SineType(base)

    prescribed = _prescribed(g, max(n_max, m))
    centre = max(n_max, m)
    clusters: List[Tuple[complex, int]] = []
    alphas: List[complex] = []
    condition = 1.0
    f = base
    used_eps = 0.0
    if m >= 0:
        l1 = l1_norm(tail)[0]
        used_eps = eps or min(
            cfg.eps_perturb,
            (space.neumann_radius - space.norm(tail)) / 4,
            (np.pi / 2 - l1) / 4,
        )
        labels = list(range(-m, m + 1))
        bumped = [b_map(tail + CoeffSeq.delta(l, N, used_eps), cfg) for l in labels]
        low = np.pi * np.array(labels) + np.array([tail[l] for l in labels])
        _check_structure(bumped, low, cfg)

        clusters = _clusters(prescribed[centre - m : centre + m + 1], cfg.multiplicity_tol)
        rows, rhs = [], []
        for w, r in clusters:
            for j in range(r):
                rows.append([transform(fl - base, w, j) for fl in bumped])
                rhs.append(-evaluate_derivative(G, w, j))
        A = np.array(rows, dtype=complex)
        condition = float(np.linalg.cond(A))
        logger.debug(f"patch system of order {2 * m + 1}, condition {condition:.3e}")
        if not np.isfinite(condition) or condition > cfg.cond_max:
            raise PatchSystemIllConditioned(
                "patch system ill-conditioned; decrease eps or increase m"
            )
        solution = scipy.linalg.solve(A, np.array(rhs, dtype=complex))
        alphas = [complex(a) for a in solution]
        for a, fl in zip(alphas, bumped):
            f = f + a * (fl - base)

    residuals = _verify(SineType(f), prescribed, centre, m, clusters, cfg)
    zeros = ZeroSet(
        max(m, 0),
        prescribed[centre - n_max : centre + n_max + 1],
        clusters,
        certified_m=0,
    )
    logger.info(f"inverse map: m = {m}, eps = {used_eps:.3g}, |f| = {f.norm():.4g}")
    return InverseResult(f, zeros, m, used_eps, alphas, residuals, condition)


def _check_structure(
    bumped: List[CoeffSeq], low: np.ndarray, cfg: SolverConfig
) -> None:
    """G_l must miss its own low zero and keep all the others."""
    for i, fl in enumerate(bumped):
        values = _zero_residuals(SineType(fl), low, cfg)
        others = np.delete(values, i)
        if values[i] <= 10 * cfg.res_tol or (others.size and others.max() > cfg.res_tol):
            raise InterpolationFailure(
                f"perturbed function {i - len(bumped) // 2} breaks the patch structure"
            )


def _verify(
    F: SineType,
    prescribed: np.ndarray,
    centre: int,
    m: int,
    clusters: List[Tuple[complex, int]],
    cfg: SolverConfig,
) -> List[float]:
    residuals = _zero_residuals(F, prescribed, cfg)
    report = residuals.tolist()
    failed = residuals.max() > 10 * cfg.res_tol
    for w, r in clusters:
        for j in range(1, r):
            value = abs(evaluate_derivative(F, w, j)) * np.exp(-abs(w.imag))
            report.append(float(value))
            failed = failed or value > 100 * cfg.res_tol
    if failed:
        raise InverseResidualExceeded(
            f"inverse residual exceeded: worst {max(report):.3e}", report
        )
    return report
