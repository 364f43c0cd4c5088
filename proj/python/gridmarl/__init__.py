"""Distributed load-frequency control: simulator, dispatch, MADDPG agents."""

try:
    from ._gridmarl import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _gridmarl import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)
