from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from loguru import logger

from ..settings import SolverConfig, settings
from . import NumericalFailure
from .evaluation import evaluate, evaluate_derivative
from .models import SineType, ZeroSet

MAX_CONTOUR_POINTS = 1 << 17
MIN_EDGE_SPACING = 1e-7
MAX_ARG_STEP = np.pi / 4
NUDGE = np.pi / 50
SPLIT_FRACTIONS = (0.5137, 0.4719, 0.5381, 0.4457, 0.5593)
ZERO_RESIDUAL = 1e-10
RESIDUAL_FLOOR = 4 * np.finfo(float).eps


class ContourError(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class NewtonFailure(NumericalFailure):
    def __init__(self, message: str, best: complex):
        super().__init__(message)
        self.best = best


class EnumerationFailure(NumericalFailure):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Refinement(NamedTuple):
    root: complex
    iterations: int
    method: str = "newton"


def _circle_sum(
    F: SineType, center: complex, radius: float, theta: np.ndarray, cfg: SolverConfig
) -> complex:
    offsets = radius * np.exp(1j * theta)
    z = center + offsets
    values = evaluate(F, z, cfg.delta_pole)
    if (np.abs(values) * np.exp(-np.abs(z.imag))).min() < cfg.contour_floor:
        raise ContourError("ill-conditioned contour")
    return complex(np.sum(evaluate_derivative(F, z, 1) / values * offsets))


def _winding_disk(
    F: SineType, center: complex, radius: float, cfg: SolverConfig
) -> float:
    P = cfg.contour_points
    total = _circle_sum(F, center, radius, 2 * np.pi * np.arange(P) / P, cfg)
    previous = total / P
    while True:
        if 2 * P > MAX_CONTOUR_POINTS:
            raise QuadratureFailure("quadrature failure")
        # doubling only needs the odd nodes of the finer grid
        odd = 2 * np.pi * (2 * np.arange(P) + 1) / (2 * P)
        total += _circle_sum(F, center, radius, odd, cfg)
        P *= 2
        current = total / P
        if abs(current - previous) < cfg.winding_tol:
            logger.trace(f"winding {current:.6f} on {P} points, r={radius:.4g}")
            return current.real if abs(current.imag) < cfg.winding_tol else np.nan
        previous = current


def count_zeros_disk(
    F: SineType,
    center: complex,
    radius: float,
    cfg: Optional[SolverConfig] = None,
) -> int:
    """Number of zeros of F, with multiplicity, in |z - center| < radius."""
    cfg = cfg or settings
    nudge = min(NUDGE, radius / 4)
    for attempt in range(6):
        r = radius + nudge * ((attempt + 1) // 2) * (-1) ** (attempt + 1)
        try:
            winding = _winding_disk(F, center, r, cfg)
        except ContourError:
            logger.debug(f"contour at r={r:.4g} around {center} too close to a zero")
            continue
        count = round(winding) if np.isfinite(winding) else None
        if count is None or abs(winding - count) > cfg.winding_tol:
            raise QuadratureFailure("quadrature failure")
        return int(count)
    raise ContourError("ill-conditioned contour")


def _edge_increment(
    F: SineType, a: complex, b: complex, cfg: SolverConfig
) -> float:
    t = np.linspace(0.0, 1.0, 65)
    values = evaluate(F, a + (b - a) * t, cfg.delta_pole)
    length = abs(b - a)
    while True:
        z = a + (b - a) * t
        if (np.abs(values) * np.exp(-np.abs(z.imag))).min() < cfg.contour_floor:
            raise ContourError("ill-conditioned contour")
        steps = np.angle(values[1:] / values[:-1])
        coarse = np.abs(steps) >= MAX_ARG_STEP
        if not coarse.any():
            return float(steps.sum())
        if np.diff(t)[coarse].min() * length < MIN_EDGE_SPACING:
            raise ContourError("ill-conditioned contour")
        mids = (t[:-1][coarse] + t[1:][coarse]) / 2
        t = np.concatenate([t, mids])
        values = np.concatenate(
            [values, evaluate(F, a + (b - a) * mids, cfg.delta_pole)]
        )
        order = np.argsort(t, kind="stable")
        t, values = t[order], values[order]


def count_zeros_rectangle(
    F: SineType,
    lo: complex,
    hi: complex,
    cfg: Optional[SolverConfig] = None,
) -> int:
    """Zeros inside the rectangle with corners lo (bottom left) and hi (top right)."""
    cfg = cfg or settings
    corners = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]
    total = sum(
        _edge_increment(F, a, b, cfg) for a, b in zip(corners[:-1], corners[1:])
    )
    winding = total / (2 * np.pi)
    count = round(winding)
    if abs(winding - count) > cfg.winding_tol:
        raise QuadratureFailure("quadrature failure")
    return int(count)


def contour_moments(
    F: SineType,
    center: complex,
    radius: float,
    count: int,
    cfg: Optional[SolverConfig] = None,
) -> np.ndarray:
    """
    Recovers the `count` zeros inside a circle from the power sums of
    (z - center) / radius and Newton's identities.
    """
    cfg = cfg or settings
    if count <= 0:
        return np.zeros(0, dtype=complex)
    P = max(cfg.contour_points, 64 * count)
    theta = 2 * np.pi * np.arange(P) / P
    u = np.exp(1j * theta)
    z = center + radius * u
    values = evaluate(F, z, cfg.delta_pole)
    if (np.abs(values) * np.exp(-np.abs(z.imag))).min() < cfg.contour_floor:
        raise ContourError("ill-conditioned contour")
    weights = evaluate_derivative(F, z, 1) / values * u * radius
    sums = np.array([np.mean(weights * u**p) for p in range(count + 1)])
    if abs(sums[0] - count) > cfg.winding_tol:
        raise QuadratureFailure("quadrature failure")
    elementary = [1.0 + 0j]
    for k in range(1, count + 1):
        elementary.append(
            sum((-1) ** (i - 1) * elementary[k - i] * sums[i] for i in range(1, k + 1))
            / k
        )
    poly = [(-1) ** k * e for k, e in enumerate(elementary)]
    return center + radius * np.roots(poly)


def _muller(
    F: SineType, z: complex, steps: int, tol: float, cfg: SolverConfig
) -> Tuple[Optional[complex], int, complex]:
    def scaled(p: complex, value: complex) -> float:
        return abs(value) * np.exp(-abs(p.imag))

    x = [z - 1e-2, z + 1e-2, z]
    fx = [evaluate(F, p, cfg.delta_pole) for p in x]
    best, best_residual = min(
        ((p, scaled(p, v)) for p, v in zip(x, fx)), key=lambda item: item[1]
    )
    for it in range(1, steps + 1):
        h1, h2 = x[1] - x[0], x[2] - x[1]
        d1, d2 = (fx[1] - fx[0]) / h1, (fx[2] - fx[1]) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        root = np.sqrt(b * b - 4 * a * fx[2])
        den = b + root if abs(b + root) >= abs(b - root) else b - root
        if den == 0 or not np.isfinite(den):
            return None, it, best
        dx = -2 * fx[2] / den
        x = [x[1], x[2], x[2] + dx]
        fx = [fx[1], fx[2], evaluate(F, x[2], cfg.delta_pole)]
        if scaled(x[2], fx[2]) < best_residual:
            best, best_residual = x[2], scaled(x[2], fx[2])
        if abs(dx) <= tol * max(1.0, abs(x[2])):
            return x[2], it, best
    return None, steps, best


def _settled(F: SineType, z: complex, tol: float, cfg: SolverConfig) -> bool:
    """|F(z)| e^{-|Im z|} <= tol, or within the rounding floor of sin at |z|."""
    residual = abs(evaluate(F, z, cfg.delta_pole)) * np.exp(-abs(z.imag))
    return residual <= max(tol, RESIDUAL_FLOOR * max(1.0, abs(z)))


def newton_refine(
    F: SineType,
    z0: complex,
    tol: Optional[float] = None,
    cfg: Optional[SolverConfig] = None,
) -> Refinement:
    cfg = cfg or settings
    tol = cfg.newton_tol if tol is None else tol
    z = complex(z0)
    best, best_residual = z, np.inf
    for it in range(1, cfg.newton_max_steps + 1):
        value = evaluate(F, z, cfg.delta_pole)
        slope = evaluate_derivative(F, z, 1)
        scale = np.exp(abs(z.imag))
        if not (np.isfinite(value) and np.isfinite(slope)):
            break
        residual = abs(value) / scale
        if residual < best_residual:
            best, best_residual = z, residual
        if abs(slope) <= 1e-10 * scale:
            logger.debug(f"derivative breakdown at {z:.6g}, switching to Muller")
            root, used, best_m = _muller(
                F, z, cfg.newton_max_steps - it, tol, cfg
            )
            if root is not None and _settled(F, complex(root), tol, cfg):
                return Refinement(complex(root), it + used, "muller")
            raise NewtonFailure("newton did not converge", complex(best_m))
        step = value / slope
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)) and _settled(F, z, tol, cfg):
            return Refinement(z, it, "newton")
    raise NewtonFailure("newton did not converge", best)


def _cluster(points: List[complex], radius: float) -> List[List[complex]]:
    groups: List[List[complex]] = []
    for p in sorted(points, key=lambda c: (c.real, c.imag)):
        for group in groups:
            if min(abs(p - q) for q in group) <= radius:
                group.append(p)
                break
        else:
            groups.append([p])
    return groups


def _inside(z: complex, lo: complex, hi: complex, slack: float = 0.0) -> bool:
    return (
        lo.real - slack <= z.real <= hi.real + slack
        and lo.imag - slack <= z.imag <= hi.imag + slack
    )


def _split(lo: complex, hi: complex, fraction: float):
    if hi.real - lo.real >= hi.imag - lo.imag:
        x = lo.real + fraction * (hi.real - lo.real)
        return (lo, complex(x, hi.imag)), (complex(x, lo.imag), hi)
    y = lo.imag + fraction * (hi.imag - lo.imag)
    return (lo, complex(hi.real, y)), (complex(lo.real, y), hi)


def _search(
    F: SineType, lo: complex, hi: complex, count: int, depth: int, cfg: SolverConfig
) -> List[complex]:
    if count <= 0:
        return []
    side = max(hi.real - lo.real, hi.imag - lo.imag)
    if side < 1e-12:
        raise EnumerationFailure(
            "enumeration failure", {"rectangle": [str(lo), str(hi)], "count": count}
        )
    center = (lo + hi) / 2
    if count == 1:
        try:
            root = newton_refine(F, center, cfg=cfg).root
            if _inside(root, lo, hi):
                return [root]
        except NewtonFailure:
            pass
    elif side <= cfg.cluster_box:
        radius = abs(hi - lo) / 2
        try:
            in_disk = count_zeros_disk(F, center, radius, cfg)
            roots = contour_moments(F, center, radius, in_disk, cfg)
        except ContourError:
            roots = np.zeros(0, dtype=complex)
        found = [complex(r) for r in roots if _inside(r, lo, hi, 1e-12)]
        if len(found) == count:
            return found
        logger.debug(f"moments found {len(found)} of {count} zeros, subdividing")

    for shift in range(len(SPLIT_FRACTIONS)):
        fraction = SPLIT_FRACTIONS[(depth + shift) % len(SPLIT_FRACTIONS)]
        first, second = _split(lo, hi, fraction)
        try:
            left = count_zeros_rectangle(F, *first, cfg)
            right = count_zeros_rectangle(F, *second, cfg)
        except ContourError:
            continue
        if left + right != count:
            logger.debug(f"split counts {left}+{right} != {count}, moving the cut")
            continue
        return _search(F, *first, left, depth + 1, cfg) + _search(
            F, *second, right, depth + 1, cfg
        )
    raise EnumerationFailure(
        "enumeration failure",
        {"rectangle": [str(lo), str(hi)], "count": count, "reason": "no clean split"},
    )


def _confirm_multiplicity(
    F: SineType, center: complex, mult: int, others: List[complex], cfg: SolverConfig
) -> None:
    gap = min((abs(center - o) for o in others), default=1.0)
    radius = min(1e-2, gap / 2)
    found = count_zeros_disk(F, center, radius, cfg)
    if found != mult:
        raise EnumerationFailure(
            "enumeration failure",
            {"cluster": str(center), "expected": mult, "counted": found},
        )


def _low_index_zeros(
    F: SineType, n0: int, cfg: SolverConfig
) -> List[Tuple[complex, int]]:
    rho = np.pi * n0 + np.pi / 6
    lo, hi = complex(-rho, -rho), complex(rho, rho)
    expected = 2 * n0 + 1
    total = count_zeros_rectangle(F, lo, hi, cfg)
    if total != expected:
        raise EnumerationFailure(
            "enumeration failure", {"n0": n0, "expected": expected, "counted": total}
        )
    roots = _search(F, lo, hi, total, 0, cfg)
    clusters = []
    groups = _cluster(roots, cfg.cluster_radius)
    centers = [complex(np.mean(g)) for g in groups]
    for k, group in enumerate(groups):
        if len(group) > 1:
            _confirm_multiplicity(
                F, centers[k], len(group), centers[:k] + centers[k + 1 :], cfg
            )
        clusters.append((centers[k], len(group)))
    return sorted(clusters, key=lambda c: (round(c[0].real, 9), c[0].imag))


def _k_count(F: SineType, n: int, cfg: SolverConfig) -> Optional[int]:
    try:
        return count_zeros_disk(F, np.pi * n, np.pi / 6, cfg)
    except (ContourError, QuadratureFailure):
        return None


def _r_certified(F: SineType, n0: int, cfg: SolverConfig) -> bool:
    """R_{n0} and its bounding square both hold exactly 2 n0 + 1 zeros."""
    rho = np.pi * n0 + np.pi / 6
    try:
        in_disk = count_zeros_disk(F, 0j, rho, cfg)
        in_square = count_zeros_rectangle(
            F, complex(-rho, -rho), complex(rho, rho), cfg
        )
    except (ContourError, QuadratureFailure):
        return False
    return in_disk == in_square == 2 * n0 + 1


def localize_all(
    F: SineType, n_max: int, cfg: Optional[SolverConfig] = None
) -> ZeroSet:
    """
    Enumerates z_n = pi n + o(1), |n| <= n_max. Indices beyond the
    empirical n0 are certified one per disk K_n, and n0 grows until R_{n0}
    holds exactly 2 n0 + 1 zeros. Those are found by rectangle subdivision
    and labelled in order of real part, then imaginary part.
    """
    cfg = cfg or settings
    if n_max < 1:
        raise EnumerationFailure("enumeration failure", {"n_max": n_max})

    n0 = 0
    for n in range(n_max, 0, -1):
        if _k_count(F, n, cfg) != 1 or _k_count(F, -n, cfg) != 1:
            n0 = n
            break
    # the K_n scan never looks at K_0; a zero between the disks is caught here
    while n0 < n_max and not _r_certified(F, n0, cfg):
        n0 += 1
    logger.debug(f"empirical n0 = {n0} for n_max = {n_max}")
    if n0 >= n_max:
        raise EnumerationFailure(
            "enumeration failure", {"n0": n0, "n_max": n_max, "reason": "no K_n tail"}
        )

    zeros = np.zeros(2 * n_max + 1, dtype=complex)
    for n in [k for m in range(n0 + 1, n_max + 1) for k in (-m, m)]:
        root = newton_refine(F, np.pi * n, cfg=cfg).root
        if abs(root - np.pi * n) > np.pi / 6:
            raise EnumerationFailure(
                "enumeration failure", {"n": n, "root": str(root), "reason": "left K_n"}
            )
        zeros[n + n_max] = root

    clusters = _low_index_zeros(F, n0, cfg)
    index = -n0
    for w, mult in clusters:
        for _ in range(mult):
            zeros[index + n_max] = w
            index += 1

    for m in sorted({n0, n_max}):
        counted = count_zeros_disk(F, 0j, np.pi * m + np.pi / 6, cfg)
        if counted != 2 * m + 1:
            raise EnumerationFailure(
                "enumeration failure", {"m": m, "expected": 2 * m + 1, "counted": counted}
            )

    residuals = np.abs(evaluate(F, zeros, cfg.delta_pole)) * np.exp(-np.abs(zeros.imag))
    worst = int(np.argmax(residuals))
    if residuals[worst] > ZERO_RESIDUAL:
        raise EnumerationFailure(
            "enumeration failure",
            {"n": worst - n_max, "residual": float(residuals[worst])},
        )
    logger.info(f"localized {2 * n_max + 1} zeros, n0 = {n0}")
    return ZeroSet(n0, zeros, clusters, certified_m=n_max)
