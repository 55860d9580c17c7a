class DataError(ValueError):
    """A file, argument, or configuration violates a data contract."""
