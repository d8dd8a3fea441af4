"""Affine differential-geometric invariants of surfaces in 3-space, the
direction equation of their affine asymptotic lines, its singular points,
and the conormal-surface correspondence."""

__version__ = "1.0.0"

from . import affine, bde, conormal, flow, jets, singular, surface  # noqa: F401
