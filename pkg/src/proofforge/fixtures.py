"""Machines shipped with the package, loaded from ``machines/*.tm``."""

from functools import lru_cache
from importlib import resources

from .machine import TuringMachine, check_machine, parse_machine

FIXTURE_NAMES = ("const1", "firstbit", "allzero", "scanner")


def fixture_path(name: str):
    return resources.files(__package__).joinpath("machines").joinpath(f"{name}.tm")


@lru_cache(maxsize=None)
def load_fixture(name: str) -> TuringMachine:
    text = fixture_path(name).read_text(encoding="ascii")
    return check_machine(parse_machine(text, name=name))


def M_CONST1() -> TuringMachine:
    return load_fixture("const1")


def M_FIRSTBIT() -> TuringMachine:
    return load_fixture("firstbit")


def M_ALLZERO() -> TuringMachine:
    return load_fixture("allzero")


def M_SCANNER() -> TuringMachine:
    return load_fixture("scanner")
