"""Exception types shared across the package."""


class StormweaveError(Exception):
    """Base class for all package errors."""


class InputError(StormweaveError):
    """Bad input: unreadable files, schema mismatches, invalid values.

    Maps to CLI exit code 2.
    """


class StaleArtifactError(InputError):
    """An artifact's recorded checksum does not match its companion input."""


class InvariantError(StormweaveError):
    """An internal contract was violated. Maps to CLI exit code 3."""
