import numpy as np
import pytest
from mock import patch

from sinetype.core.evaluation import evaluate
from sinetype.core.fourier import reflect
from sinetype.core.models import CoeffSeq, SineType
from sinetype.core.oracle import (
    ContourError,
    EnumerationFailure,
    NewtonFailure,
    QuadratureFailure,
    contour_moments,
    count_zeros_disk,
    count_zeros_rectangle,
    localize_all,
    newton_refine,
)

from ..helpers import random_coeffs, random_l1_small

ZERO = SineType(CoeffSeq.zeros(4))
CONST = SineType(CoeffSeq.delta(0, 4, 0.05))
HARMONIC = SineType(CoeffSeq.delta(2, 4, 0.03))


# check disk counts for sin z and a constant perturbation
def test_count_zeros_disk(cfg):
    assert count_zeros_disk(ZERO, 0j, 5 * np.pi + np.pi / 6, cfg) == 11
    assert count_zeros_disk(ZERO, 7 * np.pi, np.pi / 6, cfg) == 1
    assert count_zeros_disk(CONST, 0j, np.pi / 6, cfg) == 1
    assert count_zeros_disk(ZERO, np.pi / 2, 0.5, cfg) == 0


# check rectangle counts by argument increments
def test_count_zeros_rectangle(cfg):
    assert count_zeros_rectangle(ZERO, -1 - 1j, 4 + 1j, cfg) == 2
    lo, hi = -2 * np.pi - 0.5 - 0.5j, -2 * np.pi + 0.5 + 0.5j
    assert count_zeros_rectangle(HARMONIC, lo, hi, cfg) == 1


# check a contour through a zero is moved off it
def test_disk_nudge(cfg):
    with patch(
        "sinetype.core.oracle._winding_disk", side_effect=[ContourError("x"), 3.0]
    ) as winding:
        assert count_zeros_disk(ZERO, 0j, np.pi, cfg) == 3
    assert winding.call_count == 2
    assert winding.call_args_list[1][0][2] != np.pi


# check a non-integer winding number is reported
def test_quadrature_failure(cfg):
    with patch("sinetype.core.oracle._winding_disk", return_value=2.4):
        with pytest.raises(QuadratureFailure):
            count_zeros_disk(ZERO, 0j, np.pi, cfg)


# check a contour that never clears the zeros gives up
def test_contour_error(cfg):
    with patch(
        "sinetype.core.oracle._winding_disk", side_effect=ContourError("ill-conditioned")
    ):
        with pytest.raises(ContourError):
            count_zeros_disk(ZERO, 0j, np.pi, cfg)


# check Newton on the closed forms
def test_newton_refine(cfg):
    assert abs(newton_refine(ZERO, 3.0, cfg=cfg).root - np.pi) < 1e-14
    assert abs(newton_refine(CONST, 0.1, cfg=cfg).root + 0.05) < 1e-12
    found = newton_refine(HARMONIC, -2 * np.pi, cfg=cfg)
    assert abs(found.root - (-2 * np.pi - 0.03)) < 1e-11
    assert found.method == "newton"


# check Newton far up the imaginary axis reports its best iterate
def test_newton_failure(cfg):
    with pytest.raises(NewtonFailure) as exc:
        newton_refine(ZERO, 300j, cfg=cfg)
    assert isinstance(exc.value.best, complex)


# check contour moments recover the zeros inside a circle
def test_contour_moments(cfg):
    roots = sorted(contour_moments(ZERO, np.pi / 2, 2.0, 2, cfg), key=lambda z: z.real)
    assert abs(roots[0]) < 1e-10
    assert abs(roots[1] - np.pi) < 1e-10
    assert contour_moments(ZERO, 0j, 1.0, 0, cfg).size == 0


# check the enumeration of the closed forms
def test_localize_closed_forms(cfg):
    zeros = localize_all(ZERO, 10, cfg)
    assert zeros.n0 == 0 and zeros.n_max == 10
    assert np.allclose(zeros.zeros, np.pi * np.arange(-10, 11), rtol=0, atol=1e-14)

    zeros = localize_all(CONST, 10, cfg)
    assert abs(zeros[0] + 0.05) < 1e-12
    assert zeros.clusters == [(zeros[0], 1)]

    zeros = localize_all(HARMONIC, 10, cfg)
    assert abs(zeros[-2] + 2 * np.pi + 0.03) < 1e-11


# check every enumerated zero is a zero and stays in its disk
def test_localize_small_f(rng, cfg):
    for _ in range(3):
        F = SineType(random_l1_small(rng, cfg.N))
        zeros = localize_all(F, cfg.n_max, cfg)
        assert zeros.n0 == 0
        assert zeros.certified_m == cfg.n_max
        assert np.all(np.abs(zeros.zeta) < np.pi / 6)
        scaled = np.abs(evaluate(F, zeros.zeros)) * np.exp(-np.abs(zeros.zeros.imag))
        assert scaled.max() <= 1e-10


# check R_m holds exactly 2m + 1 zeros and K_n exactly one, for sin z and small f
def test_rouche_counts(rng, full_cfg):
    cfg = full_cfg.updated(N=128)
    functions = [SineType(CoeffSeq.zeros(cfg.N))]
    functions += [SineType(random_l1_small(rng, cfg.N)) for _ in range(20)]
    for F in functions:
        for m in range(1, 16):
            assert count_zeros_disk(F, 0j, np.pi * m + np.pi / 6, cfg) == 2 * m + 1
        for n in [k for j in range(1, 41) for k in (-j, j)]:
            assert count_zeros_disk(F, np.pi * n, np.pi / 6, cfg) == 1


# check |sin z| e^{-|Im z|} stays above 1/4 on the boundaries of R_m
def test_contour_lower_bound():
    theta = 2 * np.pi * np.arange(10 ** 4) / 10 ** 4
    for m in range(1, 21):
        z = (np.pi * m + np.pi / 6) * np.exp(1j * theta)
        assert (np.abs(np.sin(z)) * np.exp(-np.abs(z.imag))).min() >= 0.25 - 1e-9


# check zeros of an f with c_{-n} = -conj(c_n) are symmetric about the imaginary axis
def test_reflection_symmetry(rng, cfg):
    a = random_coeffs(rng, cfg.N, norm=0.05)
    c = 0.5 * (a - CoeffSeq(np.conj(reflect(a).entries)))
    zeros = localize_all(SineType(c), 12, cfg)
    for n in range(-12, 13):
        assert abs(zeros[-n] + np.conj(zeros[n])) < 1e-10


# check the enumeration needs at least one index
def test_localize_needs_indices(cfg):
    with pytest.raises(EnumerationFailure) as exc:
        localize_all(ZERO, 0, cfg)
    assert exc.value.diagnostics == {"n_max": 0}


# check a zero outside K_0 but inside R_1 widens the low-index region
def test_localize_zero_between_disks(cfg):
    F = SineType(CoeffSeq.delta(0, 4, 0.6))
    zeros = localize_all(F, 10, cfg)
    assert zeros.n0 == 1
    assert abs(zeros[0] + 0.6) < 1e-12
    assert abs(zeros[-1] + np.pi) < 1e-12 and abs(zeros[1] - np.pi) < 1e-12
    for n in range(2, 11):
        assert abs(zeros[n] - np.pi * n) < 1e-12
        assert abs(zeros[-n] + np.pi * n) < 1e-12
    assert [r for _, r in zeros.clusters] == [1, 1, 1]


# check a vanishing step is not accepted while |F| stays large
def test_newton_checks_residual(cfg):
    with patch("sinetype.core.oracle.evaluate", return_value=1e-6 + 0j), patch(
        "sinetype.core.oracle.evaluate_derivative", return_value=1e12 + 0j
    ):
        with pytest.raises(NewtonFailure) as exc:
            newton_refine(ZERO, 1.0, cfg=cfg)
    assert abs(exc.value.best - 1.0) < 1e-12
