from abc import ABC, abstractmethod

from ..core.models import CoeffSeq


class CoefficientSpace(ABC):
    """
    A function space X on (0, 1) seen through its Fourier coefficients.
    Implementations fix the product constant rho, the norm of the
    multiplication operator M and the polynomial projection used when
    the Gamma sequence is reduced.
    """

    @property
    @abstractmethod
    def rho(self) -> float:
        pass

    @property
    @abstractmethod
    def m_norm(self) -> float:
        pass

    @abstractmethod
    def norm(self, a: CoeffSeq) -> float:
        pass

    @abstractmethod
    def project(self, a: CoeffSeq, d: int) -> CoeffSeq:
        """Trigonometric polynomial of degree <= d approximating `a`."""

    @property
    def r0(self) -> float:
        return 1 / (4 * self.rho)

    @property
    def neumann_radius(self) -> float:
        return 1 / (2 * self.rho * self.m_norm)

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(rho={self.rho}, |M|={self.m_norm})"
