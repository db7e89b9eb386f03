import pytest

import nullsteer as ns


@pytest.fixture(scope="session")
def two_level():
    model = ns.build_two_level(1.0)
    return model, ns.spectral_decompose(model), ns.site_state(model, "r")


@pytest.fixture(scope="session")
def chain():
    model = ns.build_three_level_chain(1.0)
    return model, ns.spectral_decompose(model), ns.site_state(model, "0")


@pytest.fixture(scope="session")
def v_atom():
    # detection on the strongly coupled B site; G is the usual initial state
    model = ns.build_v_atom(0.0, 3.0, 5.0, 0.01, 1.0)
    return model, ns.spectral_decompose(model), ns.site_state(model, "B")


@pytest.fixture(scope="session")
def tree():
    model = ns.build_glued_tree(3)
    return model, ns.spectral_decompose(model), ns.site_state(model, "(1,1)")
