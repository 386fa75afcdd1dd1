class ResourceLimitError(RuntimeError):
    """A configured size limit was exceeded.

    ``layer`` is the number of circuit layers applied when the limit was
    hit (``None`` outside of propagation).
    """

    def __init__(self, message: str, layer: int | None = None, size: int | None = None):
        super().__init__(message)
        self.layer = layer
        self.size = size
