from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, validator

from . import InputError

Number = Union[complex, float, int]


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class CoeffSeqPayload(BaseModel):
    N: int
    re: List[float]
    im: List[float]

    @validator("im")
    def validate_lengths(cls, val, values):
        n = values.get("N")
        if n is not None and not len(val) == len(values.get("re", [])) == 2 * n + 1:
            raise ValueError(f"expected {2 * n + 1} entries for N = {n}")
        return val


class GridPayload(BaseModel):
    S: int
    re: List[float]
    im: List[float]

    @validator("im")
    def validate_lengths(cls, val, values):
        s = values.get("S")
        if s is not None and not len(val) == len(values.get("re", [])) == s:
            raise ValueError(f"expected {s} samples")
        return val


class SineTypePayload(BaseModel):
    alpha: Tuple[float, float]
    m_minus: Tuple[float, float]
    m_plus: Tuple[float, float]
    f: CoeffSeqPayload


class ZeroPayload(BaseModel):
    n: int
    re: float
    im: float


class ClusterPayload(BaseModel):
    re: float
    im: float
    mult: int


class ZeroSetPayload(BaseModel):
    n0: int
    zeros: List[ZeroPayload]
    clusters: List[ClusterPayload] = []
    certified_m: int


class CoeffSeq:
    """
    Fourier coefficients c_n, |n| <= N, of a function on (0, 1); entries
    outside the window are zero.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Number]):
        arr = np.array(entries, dtype=complex).ravel()
        if arr.size % 2 != 1:
            raise InputError("a coefficient window needs an odd number of entries")
        if not np.all(np.isfinite(arr)):
            raise InputError("coefficients must be finite")
        arr.setflags(write=False)
        self.entries = arr

    @classmethod
    def zeros(cls, N: int) -> "CoeffSeq":
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def delta(cls, n: int, N: Optional[int] = None, value: Number = 1.0) -> "CoeffSeq":
        N = abs(n) if N is None else N
        if abs(n) > N:
            raise InputError(f"index {n} lies outside the window {N}")
        arr = np.zeros(2 * N + 1, dtype=complex)
        arr[n + N] = value
        return cls(arr)

    @classmethod
    def from_dict(cls, data: dict) -> "CoeffSeq":
        payload = CoeffSeqPayload(**data)
        return cls(np.array(payload.re) + 1j * np.array(payload.im))

    def to_dict(self) -> dict:
        return {
            "N": self.half_width,
            "re": [float(x) for x in self.entries.real],
            "im": [float(x) for x in self.entries.imag],
        }

    @property
    def half_width(self) -> int:
        return (self.entries.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        N = self.half_width
        return np.arange(-N, N + 1)

    def __getitem__(self, n: int) -> complex:
        N = self.half_width
        if abs(n) > N:
            return 0j
        return complex(self.entries[n + N])

    def __iter__(self) -> Iterator[complex]:
        return iter(complex(x) for x in self.entries)

    def __len__(self) -> int:
        return self.entries.size

    def resized(self, N: int) -> "CoeffSeq":
        """Zero-extend or truncate to half-width N."""
        own = self.half_width
        if N == own:
            return self
        if N > own:
            arr = np.zeros(2 * N + 1, dtype=complex)
            arr[N - own : N + own + 1] = self.entries
            return CoeffSeq(arr)
        return CoeffSeq(self.entries[own - N : own + N + 1])

    def aligned(self, other: "CoeffSeq") -> Tuple[np.ndarray, np.ndarray]:
        N = max(self.half_width, other.half_width)
        return self.resized(N).entries, other.resized(N).entries

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def at(self, t) -> np.ndarray:
        """Values of sum_n c_n e^{2 pi i n t} at the points t."""
        t = np.asarray(t, dtype=float)
        phases = np.exp(2j * np.pi * np.multiply.outer(t, self.indices))
        return phases @ self.entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffSeq):
            return NotImplemented
        a, b = self.aligned(other)
        return bool(np.array_equal(a, b))

    __hash__ = None  # type: ignore

    def __add__(self, other: "CoeffSeq") -> "CoeffSeq":
        a, b = self.aligned(other)
        return CoeffSeq(a + b)

    def __sub__(self, other: "CoeffSeq") -> "CoeffSeq":
        a, b = self.aligned(other)
        return CoeffSeq(a - b)

    def __neg__(self) -> "CoeffSeq":
        return CoeffSeq(-self.entries)

    def __mul__(self, scalar: Number) -> "CoeffSeq":
        return CoeffSeq(self.entries * scalar)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"CoeffSeq(N={self.half_width}, norm={self.norm():.3e})"


class GridFunction:
    """Samples h(j/S), j = 0..S-1; S is a power of two."""

    __slots__ = ("samples",)

    def __init__(self, samples: Sequence[Number]):
        arr = np.array(samples, dtype=complex).ravel()
        size = arr.size
        if size < 1 or size & (size - 1):
            raise InputError("the sample count must be a power of two")
        if not np.all(np.isfinite(arr)):
            raise InputError("samples must be finite")
        arr.setflags(write=False)
        self.samples = arr

    @classmethod
    def from_callable(cls, h, S: int) -> "GridFunction":
        return cls(h(np.arange(S) / S))

    @classmethod
    def from_dict(cls, data: dict) -> "GridFunction":
        payload = GridPayload(**data)
        return cls(np.array(payload.re) + 1j * np.array(payload.im))

    def to_dict(self) -> dict:
        return {
            "S": self.sample_count,
            "re": [float(x) for x in self.samples.real],
            "im": [float(x) for x in self.samples.imag],
        }

    @property
    def sample_count(self) -> int:
        return self.samples.size

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.sample_count) / self.sample_count


class GammaElement:
    """The Taylor data (a_0, ..., a_K) driving the zero equation."""

    __slots__ = ("stack",)

    def __init__(self, terms: Sequence[CoeffSeq]):
        if not terms:
            raise InputError("a Gamma element needs at least one term")
        N = max(t.half_width for t in terms)
        self.stack = _frozen([t.resized(N).entries for t in terms])

    @classmethod
    def from_array(cls, stack: np.ndarray) -> "GammaElement":
        return cls([CoeffSeq(row) for row in np.atleast_2d(stack)])

    @classmethod
    def zeros(cls, K: int, N: int) -> "GammaElement":
        return cls.from_array(np.zeros((K + 1, 2 * N + 1), dtype=complex))

    @property
    def order(self) -> int:
        return self.stack.shape[0] - 1

    @property
    def half_width(self) -> int:
        return (self.stack.shape[1] - 1) // 2

    @property
    def terms(self) -> List[CoeffSeq]:
        return [CoeffSeq(row) for row in self.stack]

    def __getitem__(self, k: int) -> CoeffSeq:
        return CoeffSeq(self.stack[k])

    def __sub__(self, other: "GammaElement") -> "GammaElement":
        K = max(self.order, other.order)
        N = max(self.half_width, other.half_width)
        return GammaElement.from_array(
            _padded(self.stack, K, N) - _padded(other.stack, K, N)
        )


def _padded(stack: np.ndarray, K: int, N: int) -> np.ndarray:
    out = np.zeros((K + 1, 2 * N + 1), dtype=complex)
    own = (stack.shape[1] - 1) // 2
    out[: stack.shape[0], N - own : N + own + 1] = stack
    return out


class SineType:
    """
    F(z) = sin z + sin(z + alpha) * sum_n h_n / (z + alpha + pi n), i.e. the
    normalized function of the (m_-, m_+, f) data; with alpha = 0 this is
    sin z + int_0^1 f(t) e^{iz(2t-1)} dt and `f_coeffs` are the e_n(f).
    """

    __slots__ = ("f_coeffs", "alpha", "m_minus", "m_plus")

    def __init__(
        self,
        f_coeffs: CoeffSeq,
        alpha: complex = 0j,
        m_minus: complex = 0.5j,
        m_plus: complex = -0.5j,
    ):
        if m_minus == 0 or m_plus == 0:
            raise InputError("degenerate leading term")
        self.f_coeffs = f_coeffs
        self.alpha = complex(alpha)
        self.m_minus = complex(m_minus)
        self.m_plus = complex(m_plus)

    @classmethod
    def from_dict(cls, data: dict) -> "SineType":
        payload = SineTypePayload(**data)
        return cls(
            CoeffSeq.from_dict(payload.f.dict()),
            complex(*payload.alpha),
            complex(*payload.m_minus),
            complex(*payload.m_plus),
        )

    def to_dict(self) -> dict:
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "m_minus": [self.m_minus.real, self.m_minus.imag],
            "m_plus": [self.m_plus.real, self.m_plus.imag],
            "f": self.f_coeffs.to_dict(),
        }

    @property
    def half_width(self) -> int:
        return self.f_coeffs.half_width


class ZeroSet:
    """
    Zeros z_n = pi n + zeta_n for |n| <= n_max, the low-index clusters
    (w_k, r_k) inside R_{n0}, and the largest certified disk index.
    """

    __slots__ = ("n0", "zeros", "clusters", "certified_m")

    def __init__(
        self,
        n0: int,
        zeros: Sequence[complex],
        clusters: Sequence[Tuple[complex, int]] = (),
        certified_m: int = 0,
    ):
        arr = _frozen(zeros)
        if arr.size % 2 != 1:
            raise InputError("zeros must be indexed symmetrically")
        self.n0 = int(n0)
        self.zeros = arr
        self.clusters = [(complex(w), int(r)) for w, r in clusters]
        self.certified_m = int(certified_m)

    @classmethod
    def from_dict(cls, data: dict) -> "ZeroSet":
        payload = ZeroSetPayload(**data)
        by_index = {z.n: complex(z.re, z.im) for z in payload.zeros}
        n_max = max(abs(n) for n in by_index) if by_index else 0
        missing = [n for n in range(-n_max, n_max + 1) if n not in by_index]
        if missing:
            raise InputError(f"zero indices missing: {missing[:5]}")
        return cls(
            payload.n0,
            [by_index[n] for n in range(-n_max, n_max + 1)],
            [(complex(c.re, c.im), c.mult) for c in payload.clusters],
            payload.certified_m,
        )

    def to_dict(self) -> dict:
        return {
            "n0": self.n0,
            "zeros": [
                {"n": int(n), "re": float(z.real), "im": float(z.imag)}
                for n, z in zip(self.indices, self.zeros)
            ],
            "clusters": [
                {"re": float(w.real), "im": float(w.imag), "mult": r}
                for w, r in self.clusters
            ],
            "certified_m": self.certified_m,
        }

    @property
    def n_max(self) -> int:
        return (self.zeros.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def zeta(self) -> np.ndarray:
        return self.zeros - np.pi * self.indices

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.n_max:
            raise IndexError(f"zero index {n} outside |n| <= {self.n_max}")
        return complex(self.zeros[n + self.n_max])

    def as_coeffs(self) -> CoeffSeq:
        return CoeffSeq(self.zeta)

    def decay_envelope(self) -> List[float]:
        """max |zeta_n| over the dyadic blocks 2^j < |n| <= 2^(j+1)."""
        zeta = np.abs(self.zeta)
        idx = np.abs(self.indices)
        envelope = []
        lo = 1
        while lo <= self.n_max:
            block = zeta[(idx > lo) & (idx <= 2 * lo)]
            if block.size:
                envelope.append(float(block.max()))
            lo *= 2
        return envelope


class RunManifest(BaseModel):
    command: str
    inputs: Dict[str, str] = {}
    outputs: List[str] = []
    config: Dict = {}
    version: str
    timings: Dict[str, float] = {}
    certified: Dict[str, bool] = {}
