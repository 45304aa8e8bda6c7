import csv
import json
import os
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from .core import InputError
from .core.models import CoeffSeq

RANDOM_DEGREE = 8


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise InputError(f"not an integer: {text!r}") from exc


def random_coeffs(seed: int, norm: float, N: int) -> CoeffSeq:
    """A band-limited sequence of degree min(8, N) scaled to the given l2 norm."""
    rng = np.random.default_rng(seed)
    degree = min(RANDOM_DEGREE, N)
    entries = np.zeros(2 * N + 1, dtype=complex)
    span = slice(N - degree, N + degree + 1)
    entries[span] = rng.standard_normal(2 * degree + 1) + 1j * rng.standard_normal(
        2 * degree + 1
    )
    entries *= norm / np.linalg.norm(entries)
    return CoeffSeq(entries)


def coeffs_from_spec(spec: str, N: int, seed: Optional[int] = None) -> CoeffSeq:
    """
    Builds an input sequence from `zero`, `const:c`, `harmonic:m,c`,
    `random:seed,norm` (or `random:norm` with the run seed) or `file:path`.
    """
    kind, _, args = spec.partition(":")
    params = [p for p in args.split(",") if p] if kind != "file" else [args]

    if kind == "zero" and not params:
        return CoeffSeq.zeros(N)
    if kind == "const" and len(params) == 1:
        return CoeffSeq.delta(0, N, parse_complex(params[0]))
    if kind == "harmonic" and len(params) == 2:
        m = parse_int(params[0])
        if abs(m) > N:
            raise InputError(f"harmonic {m} outside the window N = {N}")
        return CoeffSeq.delta(m, N, parse_complex(params[1]))
    if kind == "random" and len(params) in (1, 2):
        run_seed = parse_int(params[0]) if len(params) == 2 else (seed or 0)
        norm = float(parse_complex(params[-1]).real)
        return random_coeffs(run_seed, norm, N)
    if kind == "file" and params[0]:
        return load_coeffs(params[0], N)
    raise InputError(f"unknown input spec: {spec!r}")


def load_coeffs(path: str, N: int) -> CoeffSeq:
    data = read_json(path)
    # forward results carry g under a key, plain sequence files are the payload itself
    for key in ("g", "f"):
        if isinstance(data, dict) and key in data and isinstance(data[key], dict):
            data = data[key]
    try:
        coeffs = CoeffSeq.from_dict(data)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if coeffs.half_width > N:
        if np.any(coeffs.entries[: coeffs.half_width - N]) or np.any(
            coeffs.entries[coeffs.half_width + N + 1 :]
        ):
            raise InputError(f"{path}: nonzero entries beyond N = {N}")
    return coeffs.resized(N)


def read_json(path: str) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def write_json(out_dir: str, name: str, data: Any) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_csv(
    out_dir: str, name: str, header: Sequence[str], rows: Iterable[Sequence]
) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def complex_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]
