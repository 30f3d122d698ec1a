"""Weak factorization of rectangle atoms through the double Hilbert transform."""

from h1fact._core import *  # noqa: F401,F403
from h1fact._core import __doc__  # noqa: F401
