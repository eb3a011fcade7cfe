import doctest
import importlib
import pkgutil

import pytest

import jobshop_mcts

MODULES = sorted(m.name for m in pkgutil.walk_packages(jobshop_mcts.__path__, "jobshop_mcts.")
                 if not m.name.endswith("__main__"))


@pytest.mark.parametrize("name", MODULES)
def test_doctests(name):
    mod = importlib.import_module(name)
    result = doctest.testmod(mod, optionflags=doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE)
    assert result.failed == 0
