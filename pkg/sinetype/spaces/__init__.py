# flake8: noqa: F401


from .base import CoefficientSpace
from .l2 import L2Space
