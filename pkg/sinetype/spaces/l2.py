from ..core.fourier import partial_sum
from ..core.models import CoeffSeq
from .base import CoefficientSpace


class L2Space(CoefficientSpace):
    """X = L2(0, 1), so the coefficient space is l2 with rho = |M| = 1."""

    @property
    def rho(self) -> float:
        return 1.0

    @property
    def m_norm(self) -> float:
        return 1.0

    def norm(self, a: CoeffSeq) -> float:
        return a.norm()

    def project(self, a: CoeffSeq, d: int) -> CoeffSeq:
        # the partial Fourier sum is the best l2 approximation of degree d
        return partial_sum(a, d)
