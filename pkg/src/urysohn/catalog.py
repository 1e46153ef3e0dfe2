"""Named profiled spectra used as fixtures and CLI inputs.

Each entry records the 4-values result for its core, computed when the
catalog is first loaded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .spectrum import (
    Approach,
    FourValuesVerdict,
    LimitKind,
    ProfiledSpectrum,
    Spectrum,
    SpectrumProfile,
    check_four_values,
)

__all__ = ["CatalogEntry", "catalog", "get", "names"]

NO_LIMIT = SpectrumProfile(LimitKind.NO_LIMIT)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spectrum: ProfiledSpectrum
    description: str
    four_values: FourValuesVerdict

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            **self.spectrum.to_json(),
            "four_values": self.four_values.holds,
        }


def _zero_limit(vanishing: bool) -> SpectrumProfile:
    return SpectrumProfile(LimitKind.ZERO_LIMIT, vanishing_gaps_at_infinity=vanishing)


def _positive_limit(value, approach=Approach.FROM_ABOVE) -> SpectrumProfile:
    return SpectrumProfile(LimitKind.POSITIVE_LIMIT, limit_value=value, approach=approach)


def _raw():
    third = Fraction(1, 3)
    yield "integers", [0, 1, 2, 3, 4], NO_LIMIT, "integers 0..4 (the full spectrum is all naturals)"
    yield "unit", [0, 1], NO_LIMIT, "single positive distance: the countable clique"
    yield "zero-one-two", [0, 1, 2], NO_LIMIT, "distances 1 and 2: the random graph as a metric space"
    yield "powers-of-three", [0, 1, 3, 9], NO_LIMIT, "sparse powers of three, all insular"
    yield "powers-of-three-long", [0, 1, 3, 9, 27], NO_LIMIT, "sparse powers of three up to 27"
    yield (
        "geometric",
        [0, third**3, third**2, third, 1],
        _zero_limit(False),
        "negative powers of three accumulating at 0",
    )
    yield (
        "geometric-small",
        [0, third**2, third, 1],
        _zero_limit(False),
        "negative powers of three down to 1/9",
    )
    yield (
        "zero-limit-vanishing",
        [0, third**2, third, 1, 3, 3 + third, 9, 9 + third**2],
        _zero_limit(True),
        "3^-n for n >= 0 together with 3^j and 3^j + 3^-j for j >= 1",
    )
    yield (
        "positive-limit",
        [0, 1] + [2 + Fraction(1, n) for n in range(1, 7)],
        _positive_limit(2),
        "1 and 2 + 1/n, accumulating at 2 from above",
    )
    yield (
        "positive-limit-forest",
        [0, 1, 2] + [4 + Fraction(1, n) for n in range(1, 7)],
        _positive_limit(4),
        "1, 2 and 4 + 1/n: a non-jump element below the limit 4",
    )


@lru_cache(maxsize=None)
def catalog() -> dict:
    out = {}
    for name, core, profile, desc in _raw():
        spec = Spectrum(core)
        out[name] = CatalogEntry(name, ProfiledSpectrum(spec, profile), desc, check_four_values(spec))
    return out


def names() -> list[str]:
    return list(catalog())


def get(name: str) -> CatalogEntry:
    try:
        return catalog()[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None
