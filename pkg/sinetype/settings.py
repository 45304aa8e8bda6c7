import importlib
import inspect
import subprocess
from os import path
from typing import Optional

from loguru import logger
from pydantic import BaseSettings, Extra, Field, root_validator, validator


class SineTypeSettings(BaseSettings):
    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "sinetype_"
        case_sensitive = False
        extra = Extra.ignore


class TruncationSettings(SineTypeSettings):
    # half-width of every coefficient window
    N: int = Field(default=256)
    # number of Taylor terms kept in the Gamma sequence
    K: int = Field(default=16)
    coefficient_space: str = Field(default="L2Space")

    @validator("N")
    def validate_window(cls, val):
        if val < 1:
            raise ValueError("N must be at least 1")
        return val


class ForwardSettings(SineTypeSettings):
    k0: int = Field(default=8)
    d: int = Field(default=8)
    fp_tol: float = Field(default=1e-13)
    max_iter: int = Field(default=200)
    gamma_target: float = Field(default=0.2)
    contraction_max: float = Field(default=0.55)
    n1_margin: int = Field(default=4)
    patch_tol: float = Field(default=1e-8)


class OracleSettings(SineTypeSettings):
    n_max: int = Field(default=64)
    delta_pole: float = Field(default=1e-2)
    contour_points: int = Field(default=512)
    contour_floor: float = Field(default=1e-8)
    winding_tol: float = Field(default=1e-3)
    cluster_radius: float = Field(default=1e-6)
    cluster_box: float = Field(default=1e-3)
    newton_tol: float = Field(default=1e-13)
    newton_max_steps: int = Field(default=60)


class InverseSettings(SineTypeSettings):
    eps_perturb: float = Field(default=0.05)
    res_tol: float = Field(default=1e-9)
    neumann_tol: float = Field(default=1e-14)
    cond_max: float = Field(default=1e10)
    multiplicity_tol: float = Field(default=1e-9)
    norm_margin: float = Field(default=0.1)


class EnvSettings(SineTypeSettings):
    debug: bool = Field(default=False)
    seed: Optional[int] = Field(default=None)
    sinetype_path: str = Field(default=".")
    sinetype_commit: str = Field(default="unknown")


class SolverConfig(
    TruncationSettings,
    ForwardSettings,
    OracleSettings,
    InverseSettings,
    EnvSettings,
):
    @root_validator(skip_on_failure=True)
    def validate_solver(cls, values):
        if values["fp_tol"] <= 0:
            raise ValueError("fp_tol must be positive")
        if not values["K"] >= values["k0"] >= 0:
            raise ValueError("expected K >= k0 >= 0")
        if values["eps_perturb"] <= 0:
            raise ValueError("eps_perturb must be positive")
        if not 1 <= values["n_max"] <= values["N"]:
            raise ValueError("expected 1 <= n_max <= N")
        return values

    def updated(self, **kwargs) -> "SolverConfig":
        """Validated copy with `kwargs` applied; None values are ignored."""
        data = self.dict()
        data.update({k: v for k, v in kwargs.items() if v is not None})
        return SolverConfig(**data)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(
            **{k: v for k, v in d.items() if k in inspect.signature(cls).parameters}
        )

    def snapshot(self) -> dict:
        return self.dict(exclude={"sinetype_path"})


def set_cli_settings(**kwargs):
    for key, value in kwargs.items():
        setattr(settings, key, value)


def get_space(cfg: Optional[SolverConfig] = None):
    space_class = getattr(spaces_module, (cfg or settings).coefficient_space)
    return space_class()


############### INIT #################

settings = SolverConfig()

settings.sinetype_path = str(path.dirname(path.realpath(__file__)))

try:
    settings.sinetype_commit = (
        subprocess.check_output(
            ["git", "-C", settings.sinetype_path, "rev-parse", "HEAD"],
            stderr=subprocess.DEVNULL,
        )
        .strip()
        .decode("ascii")
    )
except Exception:
    settings.sinetype_commit = "unknown"


if settings.debug:
    logger.debug("Solver settings:")
    for key, value in settings.dict(exclude_none=True).items():
        logger.debug(f"{key}: {value}")


spaces_module = importlib.import_module("sinetype.spaces")
