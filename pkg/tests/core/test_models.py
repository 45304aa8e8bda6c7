import numpy as np
import pytest
from pydantic import ValidationError

from sinetype.core import InputError
from sinetype.core.models import (
    CoeffSeq,
    GammaElement,
    GridFunction,
    SineType,
    ZeroSet,
    ZeroSetPayload,
)


# check windows compare by zero extension
def test_coeffseq_window():
    a = CoeffSeq([1, 2, 3])
    assert a.half_width == 1
    assert a == a.resized(4)
    assert a[5] == 0 and a[-1] == 1
    assert (a - a.resized(3)).half_width == 3
    assert a.resized(0) == CoeffSeq([2])
    with pytest.raises(InputError):
        CoeffSeq([1, 2])
    with pytest.raises(InputError):
        CoeffSeq([np.nan])
    with pytest.raises(InputError):
        CoeffSeq.delta(3, 2)


# check the coefficient payload validates its lengths
def test_coeffseq_payload():
    a = CoeffSeq([1j, 2, -3 + 0.5j])
    assert CoeffSeq.from_dict(a.to_dict()) == a
    with pytest.raises(ValidationError):
        CoeffSeq.from_dict({"N": 2, "re": [0, 0, 0], "im": [0, 0, 0]})


# check sequences are immutable
def test_coeffseq_frozen():
    a = CoeffSeq.zeros(2)
    with pytest.raises(ValueError):
        a.entries[0] = 1


# check the point values of a trigonometric polynomial
def test_coeffseq_at():
    a = CoeffSeq.delta(1, 2, 2.0)
    assert np.allclose(a.at([0.0, 0.25]), [2.0, 2j])


# check grids must have a power-of-two length
def test_grid_function():
    h = GridFunction.from_callable(lambda t: t + 0j, 8)
    assert h.sample_count == 8
    assert np.allclose(h.nodes, np.arange(8) / 8)
    assert np.array_equal(GridFunction.from_dict(h.to_dict()).samples, h.samples)
    with pytest.raises(InputError):
        GridFunction(np.ones(6))


# check differences of Gamma elements of different shapes
def test_gamma_difference():
    small = GammaElement([CoeffSeq.delta(0, 1, 1.0)])
    large = GammaElement.zeros(3, 4)
    diff = large - small
    assert diff.order == 3 and diff.half_width == 4
    assert diff[0] == CoeffSeq.delta(0, 4, -1.0)


# check the sine-type payload
def test_sinetype_roundtrip():
    F = SineType(CoeffSeq.delta(1, 2, 0.5j), alpha=0.25)
    back = SineType.from_dict(F.to_dict())
    assert back.f_coeffs == F.f_coeffs
    assert back.alpha == 0.25 and back.m_minus == 0.5j


# check zero sets refuse listings with holes
def test_zero_set_payload():
    zeros = ZeroSet(1, np.pi * np.arange(-2, 3), [(0j, 1)], 2)
    data = zeros.to_dict()
    back = ZeroSet.from_dict(data)
    assert np.array_equal(back.zeros, zeros.zeros)
    assert back.clusters == [(0j, 1)] and back.certified_m == 2
    assert np.allclose(zeros.zeta, 0, atol=1e-15)
    assert zeros.as_coeffs().half_width == 2

    data["zeros"] = [z for z in data["zeros"] if z["n"] != 1]
    with pytest.raises(InputError):
        ZeroSet.from_dict(data)
    with pytest.raises(ValidationError):
        ZeroSetPayload(n0=0, zeros=[{"n": 0}], certified_m=0)


# check the dyadic decay envelope
def test_decay_envelope():
    n = np.arange(-8, 9)
    zeros = ZeroSet(0, np.pi * n + 1.0 / (1 + np.abs(n)) ** 2)
    envelope = zeros.decay_envelope()
    assert len(envelope) == 3
    assert envelope == sorted(envelope, reverse=True)


# check zero indices past n_max are refused instead of wrapping
def test_zero_set_index_bounds():
    zeros = ZeroSet(0, np.pi * np.arange(-2, 3))
    assert zeros[-2] == -2 * np.pi and zeros[2] == 2 * np.pi
    with pytest.raises(IndexError):
        zeros[-3]
    with pytest.raises(IndexError):
        zeros[3]
