"""Python surface for the speculative feature-caching diffusion sampler."""

from ._speca import *  # noqa: F401,F403
