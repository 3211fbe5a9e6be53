"""Model checking λY-terms against tree automata with finite semantic models."""

import sys

# terms are walked recursively; deep unfoldings need headroom
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

__version__ = "0.1.0"
