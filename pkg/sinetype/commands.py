import json
import os
import time
from typing import Callable, Dict, List, Optional, Tuple

import click
import numpy as np
from loguru import logger
from pydantic import ValidationError

from . import __version__
from .app import configure_logger
from .core import InputError, NumericalFailure
from .core.evaluation import evaluate
from .core.forward import forward_map
from .core.inverse import inverse_map
from .core.models import RunManifest, SineType, ZeroSetPayload
from .core.oracle import count_zeros_disk
from .helpers import (
    coeffs_from_spec,
    complex_pair,
    load_coeffs,
    read_json,
    write_csv,
    write_json,
)
from .settings import SolverConfig, set_cli_settings, settings

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_VERIFICATION = 4
VERIFY_RESIDUAL = 1e-8
SPEC_HELP = "zero | const:c | harmonic:m,c | random:seed,norm | file:path"


class Stopwatch:
    def __init__(self):
        self.timings: Dict[str, float] = {}
        self._last = time.perf_counter()

    def lap(self, stage: str) -> None:
        now = time.perf_counter()
        self.timings[stage] = round(now - self._last, 6)
        self._last = now


def solver_options(func):
    options = [
        click.option("--N", "N", type=int, help="Coefficient half-width."),
        click.option("--K", "K", type=int, help="Gamma truncation order."),
        click.option("--k0", type=int, help="Reduction depth."),
        click.option("--d", type=int, help="Reduction degree."),
        click.option("--fp-tol", type=float, help="Fixed-point tolerance."),
        click.option("--eps", type=float, help="Perturbation size for patching."),
        click.option("--nmax", type=int, help="Largest enumerated zero index."),
        click.option(
            "--out-dir",
            type=click.Path(file_okay=False),
            default=".",
            show_default=True,
        ),
        click.option("--seed", type=int, help="Seed for random generators."),
        click.option("--json-only", is_flag=True, help="Print only the JSON summary."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def run_config(
    N: Optional[int],
    K: Optional[int],
    k0: Optional[int],
    d: Optional[int],
    fp_tol: Optional[float],
    eps: Optional[float],
    nmax: Optional[int],
    seed: Optional[int],
) -> SolverConfig:
    if N is not None and nmax is None:
        nmax = min(settings.n_max, N)
    return settings.updated(
        N=N, K=K, k0=k0, d=d, fp_tol=fp_tol, eps_perturb=eps, n_max=nmax, seed=seed
    )


def execute(
    command: str, out_dir: str, json_only: bool, body: Callable[[], Tuple[dict, int]]
) -> None:
    """Runs a command body, mapping failures to an error file and an exit code."""
    configure_logger(command, quiet=json_only)
    os.makedirs(out_dir, exist_ok=True)
    try:
        summary, code = body()
    except (InputError, ValidationError, click.BadParameter) as exc:
        fail(command, out_dir, exc, EXIT_INPUT)
    except NumericalFailure as exc:
        fail(command, out_dir, exc, EXIT_NUMERICAL)
    else:
        click.echo(_dumps(summary))
        if code:
            logger.error(f"{command}: verification failed")
            click.get_current_context().exit(code)
        if not json_only:
            logger.success(f"{command}: results written to {out_dir}")


def fail(command: str, out_dir: str, exc: Exception, code: int) -> None:
    details = {
        key: getattr(exc, key)
        for key in ("diagnostics", "residuals", "best", "s")
        if hasattr(exc, key)
    }
    if "best" in details:
        details["best"] = complex_pair(details["best"])
    error = {
        "command": command,
        "error": exc.__class__.__name__,
        "message": str(exc),
        "exit_code": code,
        "details": details,
    }
    write_json(out_dir, "error.json", error)
    logger.error(f"{command}: {exc.__class__.__name__}: {exc}")
    click.echo(_dumps(error))
    click.get_current_context().exit(code)


def _dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True)


def write_manifest(
    command: str,
    out_dir: str,
    inputs: Dict[str, str],
    outputs: List[str],
    cfg: SolverConfig,
    watch: Stopwatch,
    certified: Dict[str, bool],
) -> str:
    manifest = RunManifest(
        command=command,
        inputs=inputs,
        outputs=[os.path.basename(p) for p in outputs] + ["manifest.json"],
        config=cfg.snapshot(),
        version=__version__,
        timings=watch.timings,
        certified=certified,
    )
    return write_json(out_dir, "manifest.json", manifest.dict())


@click.group()
@click.option("--debug", is_flag=True, help="Verbose diagnostics on stderr.")
@click.version_option(__version__)
def main(debug: bool):
    """Zeros of sin z + int_0^1 f(t) e^{iz(2t-1)} dt and their inverse problem."""
    if debug:
        set_cli_settings(debug=True)


@main.command("zeros")
@click.option("--f", "f_spec", required=True, help=SPEC_HELP)
@solver_options
def cmd_zeros(f_spec, out_dir, json_only, **overrides):
    """Forward map: f -> zeros and g."""

    def body():
        watch = Stopwatch()
        cfg = run_config(**overrides)
        f = coeffs_from_spec(f_spec, cfg.N, cfg.seed)
        watch.lap("input")
        result = forward_map(f, cfg)
        watch.lap("forward_map")

        zeros = result.zeros
        rows = [
            (int(n), float(z.real), float(z.imag), float(abs(zeta)))
            for n, z, zeta in zip(zeros.indices, zeros.zeros, zeros.zeta)
        ]
        outputs = [
            write_json(out_dir, "zeros.json", zeros.to_dict()),
            write_json(out_dir, "g.json", result.g.to_dict()),
            write_json(out_dir, "forward.json", result.to_dict()),
            write_csv(out_dir, "zeros.csv", ("n", "re_z", "im_z", "abs_zeta"), rows),
        ]
        watch.lap("write")
        write_manifest(
            "zeros",
            out_dir,
            {"f": f_spec},
            outputs,
            cfg,
            watch,
            {"forward": result.certified, "enumeration": True},
        )
        summary = {
            "command": "zeros",
            "n0": zeros.n0,
            "n1": result.n1,
            "certified": result.certified,
            "out_dir": out_dir,
        }
        return summary, 0

    execute("zeros", out_dir, json_only, body)


@main.command("construct")
@click.option("--g", "g_spec", required=True, help=SPEC_HELP)
@click.option("--m", "split", type=int, default=None, help="Force the split degree.")
@click.option(
    "--reference",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="f.json to report the roundtrip error against.",
)
@solver_options
def cmd_construct(g_spec, split, reference, out_dir, json_only, **overrides):
    """Inverse map: g -> f."""

    def body():
        watch = Stopwatch()
        cfg = run_config(**overrides)
        g = coeffs_from_spec(g_spec, cfg.N, cfg.seed)
        watch.lap("input")
        result = inverse_map(g, cfg, m=split, eps=overrides.get("eps"))
        watch.lap("inverse_map")

        F = SineType(result.f)
        zeros = result.zeros
        scaled = np.abs(evaluate(F, zeros.zeros)) * np.exp(-np.abs(zeros.zeros.imag))
        rows = [
            (int(n), float(z.real), float(z.imag), float(r))
            for n, z, r in zip(zeros.indices, zeros.zeros, scaled)
        ]
        report = result.to_dict()
        if reference:
            expected = load_coeffs(reference, cfg.N)
            report["roundtrip_error"] = (result.f - expected).norm()
        outputs = [
            write_json(out_dir, "f.json", result.f.to_dict()),
            write_json(out_dir, "inverse.json", report),
            write_csv(out_dir, "residuals.csv", ("n", "re_z", "im_z", "residual"), rows),
        ]
        watch.lap("write")
        write_manifest(
            "construct",
            out_dir,
            {"g": g_spec, **({"reference": reference} if reference else {})},
            outputs,
            cfg,
            watch,
            {"interpolation": True},
        )
        summary = {
            "command": "construct",
            "m": result.m,
            "eps": result.eps,
            "condition_number": result.condition_number,
            "out_dir": out_dir,
        }
        if "roundtrip_error" in report:
            summary["roundtrip_error"] = report["roundtrip_error"]
        return summary, 0

    execute("construct", out_dir, json_only, body)


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def verify_zeros(F: SineType, payload: ZeroSetPayload, cfg: SolverConfig) -> List[dict]:
    listed = {z.n: complex(z.re, z.im) for z in payload.zeros}
    if not listed:
        raise InputError("no zeros listed")
    n_max = max(abs(n) for n in listed)
    checks = []

    worst_n, worst = 0, 0.0
    for n, z in sorted(listed.items()):
        value = abs(evaluate(F, z, cfg.delta_pole)) * np.exp(-abs(z.imag))
        if value > worst:
            worst_n, worst = n, float(value)
    checks.append(
        _check("residuals", worst <= VERIFY_RESIDUAL, worst=worst, n=worst_n)
    )

    for m in sorted({payload.n0, n_max}):
        radius = np.pi * m + np.pi / 6
        counted = count_zeros_disk(F, 0j, radius, cfg)
        inside = sum(abs(z) < radius for z in listed.values())
        checks.append(
            _check(
                f"R_{m}",
                counted == inside == 2 * m + 1,
                expected=2 * m + 1,
                counted=counted,
                listed=inside,
            )
        )

    for n in [k for j in range(payload.n0 + 1, n_max + 1) for k in (-j, j)]:
        counted = count_zeros_disk(F, np.pi * n, np.pi / 6, cfg)
        present = n in listed and abs(listed[n] - np.pi * n) <= np.pi / 6
        checks.append(
            _check(f"K_{n}", counted == 1 and present, counted=counted, listed=present)
        )
    return checks


@main.command("verify")
@click.option("--f", "f_spec", required=True, help="The f whose zeros are checked.")
@click.option("--zeros", "zeros_path", required=True, type=click.Path(dir_okay=False))
@solver_options
def cmd_verify(f_spec, zeros_path, out_dir, json_only, **overrides):
    """Re-certify a zero listing: residuals, R_m and K_n counts."""

    def body():
        watch = Stopwatch()
        cfg = run_config(**overrides)
        f = coeffs_from_spec(f_spec, cfg.N, cfg.seed)
        payload = ZeroSetPayload(**read_json(zeros_path))
        watch.lap("input")
        checks = verify_zeros(SineType(f), payload, cfg)
        watch.lap("verify")
        passed = all(c["passed"] for c in checks)
        report = {"checks": checks, "passed": passed}
        outputs = [write_json(out_dir, "verify.json", report)]
        write_manifest(
            "verify",
            out_dir,
            {"f": f_spec, "zeros": zeros_path},
            outputs,
            cfg,
            watch,
            {"verify": passed},
        )
        failed = [c["name"] for c in checks if not c["passed"]]
        summary = {"command": "verify", "passed": passed, "failed": failed}
        return summary, 0 if passed else EXIT_VERIFICATION

    execute("verify", out_dir, json_only, body)
