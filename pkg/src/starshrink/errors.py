"""Shared error type for shrink constructions."""


class ShrinkError(RuntimeError):
    """A shrink construction could not satisfy its certified conditions."""
