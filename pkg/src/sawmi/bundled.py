"""Problem files shipped with the package."""

from __future__ import annotations

from importlib import resources

from .formula import Atom, BoolAtom
from .sexpr import parse_problem
from .wmi import WmiProblem

NAMES = ("example4", "example5", "example9", "example11", "fair", "unfair")

# decision orders pinned for reproducible integral counts
ORDERS: dict[str, tuple[str, ...]] = {"example11": ("A2", "A1", "A3")}


def text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"no bundled problem {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("sawmi.data").joinpath(f"{name}.wmi").read_text()


def load(name: str) -> WmiProblem:
    return parse_problem(text(name))


def pinned_order(name: str) -> list[Atom] | None:
    names = ORDERS.get(name)
    return [BoolAtom(n) for n in names] if names else None
