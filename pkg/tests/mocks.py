from mock import Mock

from sinetype.core.forward import ForwardResult
from sinetype.core.models import ZeroSet
from sinetype.core.oracle import EnumerationFailure


def failing_forward_map() -> Mock:
    return Mock(
        side_effect=EnumerationFailure(
            "enumeration failure", {"m": 3, "expected": 7, "counted": 6}
        )
    )


def with_double_zero(result: ForwardResult) -> ForwardResult:
    """The same result, but reporting the low zero as a double one."""
    zeros = result.zeros
    w = zeros[0]
    doubled = ZeroSet(zeros.n0, zeros.zeros, [(w, 2)], zeros.certified_m)
    return result._replace(zeros=doubled)


def shifted_zeros(zeros: ZeroSet, n: int, shift: complex) -> ZeroSet:
    moved = zeros.zeros.copy()
    moved[n + zeros.n_max] += shift
    return ZeroSet(zeros.n0, moved, zeros.clusters, zeros.certified_m)
