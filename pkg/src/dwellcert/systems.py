"""Switched linear systems and the fixed scalar parameters of the bound.

System files are JSON documents:

    {"n": 2,
     "modes": [{"name": "A1", "matrix": [[-0.1, -1.0], [2.0, -0.1]]},
               {"name": "A2", "matrix": [[-0.1, -2.0], [1.0, -0.1]]}]}

Three classic benchmark systems ship with the package, loadable by name
via bundled_system(): "two_mode_dwell", "two_mode_arbitrary",
"five_mode_3d".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "SwitchedLinearSystem",
    "DwellParams",
    "load_system",
    "save_system",
    "bundled_system",
    "BUNDLED_SYSTEMS",
]

BUNDLED_SYSTEMS = ("two_mode_dwell", "two_mode_arbitrary", "five_mode_3d")


class SystemFormatError(ValueError):
    """Raised when a system description file is malformed."""


@dataclass(frozen=True)
class SwitchedLinearSystem:
    """State dimension n and one n-by-n matrix per mode; the mode index
    set is the position in the list."""

    n: int
    modes: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        if self.n < 1:
            raise SystemFormatError("state dimension must be positive")
        if not self.modes:
            raise SystemFormatError("at least one mode is required")
        names = [name for name, _ in self.modes]
        if len(set(names)) != len(names):
            raise SystemFormatError("mode names must be unique")
        for name, A in self.modes:
            if A.shape != (self.n, self.n):
                raise SystemFormatError(
                    f"mode {name!r}: matrix must be {self.n}x{self.n}, "
                    f"got {A.shape[0]}x{A.shape[1] if A.ndim > 1 else ''}")
            if not np.all(np.isfinite(A)):
                raise SystemFormatError(f"mode {name!r}: non-finite entries")

    @property
    def num_modes(self) -> int:
        return len(self.modes)

    @property
    def matrices(self) -> list[np.ndarray]:
        return [A for _, A in self.modes]

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.modes]

    def max_spectral_norm(self) -> float:
        return max(float(np.linalg.norm(A, 2)) for A in self.matrices)


@dataclass(frozen=True)
class DwellParams:
    """Fixed scalars of the bound computation.

    a_lower and a_upper pin the scale of the Lyapunov functions
    (a_lower * ||x|| <= V_i(x) <= a_upper * ||x||), mu bounds the jump of
    the Lyapunov value at a switch, and the value-growth exponent is
    fixed at 1 (the functions are positively homogeneous of degree 1).
    """

    a_lower: float = 1e-5
    a_upper: float = 10.0
    mu: float = 1.0
    d: int = field(default=1)

    def __post_init__(self):
        if not (0.0 < self.a_lower < self.a_upper):
            raise ValueError("need 0 < a_lower < a_upper")
        if self.mu < 1.0:
            raise ValueError("mu must be at least 1")
        if self.d != 1:
            raise ValueError("only degree-1 value growth is supported")


def _parse_system(doc: dict, where: str) -> SwitchedLinearSystem:
    if not isinstance(doc, dict):
        raise SystemFormatError(f"{where}: top level must be an object")
    try:
        n = int(doc["n"])
        raw_modes = doc["modes"]
    except KeyError as exc:
        raise SystemFormatError(f"{where}: missing field {exc}") from None
    if not isinstance(raw_modes, list) or not raw_modes:
        raise SystemFormatError(f"{where}: 'modes' must be a non-empty array")
    modes = []
    for k, entry in enumerate(raw_modes):
        name = entry.get("name", f"mode{k}")
        rows = entry.get("matrix")
        if rows is None:
            raise SystemFormatError(f"{where}: mode {name!r} has no matrix")
        try:
            A = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise SystemFormatError(
                f"{where}: mode {name!r}: matrix is not numeric") from None
        if A.shape != (n, n):
            raise SystemFormatError(
                f"{where}: mode {name!r}: matrix must be {n}x{n}")
        modes.append((str(name), A))
    try:
        return SwitchedLinearSystem(n=n, modes=tuple(modes))
    except SystemFormatError as exc:
        raise SystemFormatError(f"{where}: {exc}") from None


def load_system(path) -> SwitchedLinearSystem:
    """Read a system description from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(
            f"{path}: parse error at byte offset {exc.pos}: {exc.msg}") from None
    return _parse_system(doc, str(path))


def save_system(system: SwitchedLinearSystem, path, description: str | None = None) -> None:
    doc: dict = {"n": system.n, "modes": [
        {"name": name, "matrix": A.tolist()} for name, A in system.modes]}
    if description:
        doc["description"] = description
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def bundled_system(name: str) -> SwitchedLinearSystem:
    """Load one of the packaged benchmark systems by name."""
    if name not in BUNDLED_SYSTEMS:
        raise KeyError(f"unknown bundled system {name!r}; "
                       f"available: {', '.join(BUNDLED_SYSTEMS)}")
    ref = resources.files("dwellcert").joinpath("data", f"{name}.json")
    doc = json.loads(ref.read_text(encoding="utf-8"))
    return _parse_system(doc, name)
