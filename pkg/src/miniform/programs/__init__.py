"""The two demonstration programs shipped with the package."""

from importlib import resources


def program_text(name):
    """Source of a bundled program, e.g. ``program_text("example1.frm")``."""
    return resources.files(__name__).joinpath(name).read_text(encoding="ascii")


def program_path(name):
    return str(resources.files(__name__).joinpath(name))
