"""Distinguishing numbers of homogeneous Urysohn metric spaces over a
spectrum of distances, computed and certified at finite scale."""

from .errors import *  # noqa: F401,F403
from .spectrum import (  # noqa: F401
    Approach,
    LimitKind,
    ProfiledSpectrum,
    Spectrum,
    SpectrumProfile,
    Verdict,
    check_four_values,
    classify,
    cover,
    gap_at,
    main_theorem_classify,
    oplus,
)
from .metric import FiniteMetricSpace, validate  # noqa: F401
from .graph import SimpleGraph  # noqa: F401

__version__ = "0.1.0"
