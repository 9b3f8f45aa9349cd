"""Version lookup utilities, isolated for cleanliness"""
from importlib.metadata import PackageNotFoundError, version

SOURCE_VERSION = "0.1.0"
"""Version reported when running from a source checkout that was never installed"""


def get_active_version():
    """Get the currently active version using importlib, falling back to the source version"""
    try:
        return version("g2flow")
    except PackageNotFoundError:
        return SOURCE_VERSION
