from importlib.metadata import PackageNotFoundError
from importlib.metadata import version

DISTRIBUTION = "swarmsim"


def _resolve_version() -> str:
    # setuptools_scm writes _version.py at build time; a bare checkout has neither
    try:
        from ._version import version as scm_version
        return scm_version
    except ImportError:
        pass
    try:
        return version(DISTRIBUTION)
    except PackageNotFoundError:
        return "0.0.0"


__version__ = _resolve_version()
