"""Exception types shared across the toolkit."""


class DataError(ValueError):
    """Unreadable, malformed, or out-of-contract input data."""


class DivergenceError(RuntimeError):
    """An optimizer produced a non-finite objective or gradient."""
