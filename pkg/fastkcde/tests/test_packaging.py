import importlib.resources

import fastkcde


def test_version():
    assert isinstance(fastkcde.__version__, str)


def test_no_type_marker_shipped():
    # the API is documented in docstrings, not annotations
    assert not importlib.resources.files("fastkcde").joinpath("py.typed").is_file()
