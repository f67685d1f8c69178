"""Toolkit-wide error types."""


class DataError(Exception):
    """Malformed or inconsistent input data (files, manifests, models).

    The CLI maps this to exit code 2; contract violations on in-memory
    values raise ValueError instead.
    """
