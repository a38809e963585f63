import pytest

from gfock import space


@pytest.fixture(scope="session")
def cp1():
    return space.from_preset("cp1")


@pytest.fixture(scope="session")
def cp2():
    return space.from_preset("cp2")


@pytest.fixture(scope="session")
def cp3():
    return space.from_preset("cp3")


@pytest.fixture(scope="session")
def segre():
    return space.from_preset("segre11")


@pytest.fixture(scope="session")
def veronese():
    return space.from_preset("veronese_conic")


@pytest.fixture(scope="session")
def all_presets(cp1, cp2, cp3, segre, veronese):
    return {"cp1": cp1, "cp2": cp2, "cp3": cp3,
            "segre11": segre, "veronese_conic": veronese}
