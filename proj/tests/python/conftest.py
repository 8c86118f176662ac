import os
import sys

import pytest


@pytest.fixture(scope="session")
def sp():
    """The bindings module: installed package if present, else the build tree."""
    try:
        import speca_py

        return speca_py
    except ImportError:
        pass
    build_dir = os.environ.get("SPECA_PYMODULE_DIR")
    if build_dir is None:
        here = os.path.dirname(os.path.abspath(__file__))
        build_dir = os.path.join(here, "..", "..", "build")
    sys.path.insert(0, build_dir)
    return __import__("_speca")
