from importlib.metadata import PackageNotFoundError, version

DISTRIBUTION = "dunkl-lab"
UNINSTALLED_VERSION = "0.0.0"


def installed_version(distribution: str = DISTRIBUTION) -> str:
    "Version of the installed distribution; source checkouts report `0.0.0`."
    try:
        return version(distribution)
    except PackageNotFoundError:
        return UNINSTALLED_VERSION


__version__ = installed_version()
