from __future__ import annotations

import pytest

from fibreapp import cli
from fibreapp.groebner import Ideal
from fibreapp.polycore import Ring


def corpus_spec(name: str):
    """MapSpec of a shipped corpus entry."""
    return cli.parse_map_text(cli.corpus_entries()[name], default_name=name).spec


def ideal(names: str, *gens: str) -> Ideal:
    """Shorthand: ``ideal("x y", "x^2 - y")``."""
    ring = Ring(tuple(names.split()))
    return Ideal.parse(ring, gens)


@pytest.fixture
def bp2():
    return corpus_spec("breakpoint-d2")
