"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration or config-file entry is invalid.

    The message always names the offending field/key so CLI users can fix
    their input; the CLI maps this to exit code 2.
    """
