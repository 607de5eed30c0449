"""
Exception base shared by all ZMOS packages.
"""


class ZmosError(Exception):
    """
    Base class for every error raised deliberately by this package.
    """
