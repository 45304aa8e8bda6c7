import pytest
from pydantic import ValidationError

from sinetype.settings import SolverConfig, settings


# check the cross-field constraints
def test_validation():
    with pytest.raises(ValidationError):
        settings.updated(N=8, n_max=16)
    with pytest.raises(ValidationError):
        settings.updated(K=4, k0=8)
    with pytest.raises(ValidationError):
        settings.updated(fp_tol=0.0)
    with pytest.raises(ValidationError):
        settings.updated(eps_perturb=-0.1)


# check overrides leave the shared settings alone
def test_updated():
    cfg = settings.updated(N=32, n_max=16, K=None)
    assert cfg.N == 32 and cfg.K == settings.K
    assert cfg is not settings and settings.N == SolverConfig().N


# check configs survive a manifest snapshot
def test_snapshot():
    cfg = settings.updated(N=40, n_max=20)
    snapshot = cfg.snapshot()
    assert "sinetype_path" not in snapshot
    again = SolverConfig.from_dict({**snapshot, "unknown": 1})
    assert again.N == 40 and again.n_max == 20


# check the environment prefix
def test_environment(monkeypatch):
    monkeypatch.setenv("SINETYPE_N", "48")
    monkeypatch.setenv("SINETYPE_N_MAX", "24")
    monkeypatch.setenv("SINETYPE_COEFFICIENT_SPACE", "L2Space")
    cfg = SolverConfig()
    assert cfg.N == 48 and cfg.n_max == 24
    assert cfg.coefficient_space == "L2Space"
