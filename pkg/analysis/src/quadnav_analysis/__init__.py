"""Static figure rendering for quadnav benchmark results."""

from .plots import render_all

__all__ = ["render_all"]
