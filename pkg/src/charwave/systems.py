"""PDE systems: equations, solved-derivative maps and conservation form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .symbolic import Alphabet, Expr, ExprError, parse


class InvalidSystemError(ExprError):
    """Invalid system description."""


@dataclass(frozen=True)
class PdeSystem:
    name: str
    alphabet: Alphabet
    equations: tuple[Expr, ...]
    solved: dict[str, Expr]
    # conservation form ``density_t + flux_x = 0`` per equation, when known
    density: tuple[Expr, ...] | None = None
    flux: tuple[Expr, ...] | None = None
    text: dict = field(default_factory=dict, compare=False, repr=False)

    def check(self) -> None:
        """Raise unless substituting ``solved`` annihilates every equation."""
        for key in self.solved:
            sym = self.alphabet.resolve(key)
            if sym.kind != "jet":
                raise InvalidSystemError(f"solved key {key!r} is not a jet symbol")
        for i, eq in enumerate(self.equations):
            if not eq.subs(self.solved).is_zero():
                raise InvalidSystemError(f"equation {i + 1} does not vanish under the solved map")

    @property
    def has_conservation_form(self) -> bool:
        return self.density is not None and self.flux is not None

    def to_json(self) -> dict:
        return dict(self.text)


def system_from_dict(data: dict) -> PdeSystem:
    try:
        name = data["name"]
        alphabet = Alphabet(data["independent"], data["dependent"], max_order=1)
        equations = tuple(parse(s, alphabet) for s in data["equations"])
        solved = {alphabet.resolve(k).name: parse(v, alphabet) for k, v in data["solved"].items()}
    except KeyError as exc:
        raise InvalidSystemError(f"system description lacks {exc.args[0]!r}") from None
    density = flux = None
    cons = data.get("conservation")
    if cons:
        fields = Alphabet(data["independent"], data["dependent"], max_order=0)
        density = tuple(parse(s, fields) for s in cons["density"])
        flux = tuple(parse(s, fields) for s in cons["flux"])
        if len(density) != len(equations) or len(flux) != len(equations):
            raise InvalidSystemError("conservation form must match the number of equations")
    sys = PdeSystem(name, alphabet, equations, solved, density, flux, dict(data))
    sys.check()
    return sys


BUILTIN_SYSTEMS = {
    "system1": {
        "name": "system1",
        "independent": ["x", "t"],
        "dependent": ["u", "v"],
        "equations": ["u_t + 2*u*u_x - v_x", "v_t + u^2*u_x - u_x"],
        "solved": {"u_t": "-2*u*u_x + v_x", "v_t": "-u^2*u_x + u_x"},
        "conservation": {"density": ["u", "v"], "flux": ["u^2 - v", "u^3/3 - u"]},
    },
    "gas-full": {
        "name": "gas-full",
        "independent": ["x", "t"],
        "dependent": ["u", "v"],
        "equations": ["u_t + u_x*v + u*v_x", "u_t*v + u*v_t + u_x*v^2 + 2*u*v*v_x"],
        "solved": {"u_t": "-u_x*v - u*v_x", "v_t": "-v*v_x"},
        "conservation": {"density": ["u", "u*v"], "flux": ["u*v", "u*v^2"]},
    },
    "gas-reduced": {
        "name": "gas-reduced",
        "independent": ["x", "t"],
        "dependent": ["u", "v"],
        "equations": ["u_t + u_x*v + u*v_x", "v_t + v*v_x"],
        "solved": {"u_t": "-u_x*v - u*v_x", "v_t": "-v*v_x"},
        "conservation": {"density": ["u", "v"], "flux": ["u*v", "v^2/2"]},
    },
}


def builtin_system(name: str) -> PdeSystem:
    if name not in BUILTIN_SYSTEMS:
        raise InvalidSystemError(f"unknown builtin system {name!r}; choose from {sorted(BUILTIN_SYSTEMS)}")
    return system_from_dict(BUILTIN_SYSTEMS[name])


def load_system(spec: str) -> PdeSystem:
    """Builtin name or path to a JSON system description."""
    if spec in BUILTIN_SYSTEMS:
        return builtin_system(spec)
    path = Path(spec)
    if not path.exists():
        raise InvalidSystemError(f"{spec!r} is neither a builtin system nor a file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSystemError(f"{spec}: invalid JSON ({exc})") from None
    return system_from_dict(data)
