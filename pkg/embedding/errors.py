class EmbeddingError(Exception):
    """
    Base error of the library.

    Every error carries a machine readable ``code`` and a human readable ``message``;
    ``to_dict`` gives the {"code", "message"} shape the command line reports.
    """
    code = "invalid_input"

    def __init__(self, message, code=None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code

    def to_dict(self):
        return {"code": self.code, "message": self.message}


class InvalidInput(EmbeddingError):
    code = "invalid_input"


class ValidationFailed(EmbeddingError):
    code = "validation_failed"


class Infeasible(EmbeddingError):
    code = "infeasible"


class Degenerate(EmbeddingError):
    code = "degenerate"


class CapExceeded(EmbeddingError):
    code = "cap_exceeded"


class OutsideSupport(EmbeddingError):
    code = "outside_support"


class VerificationFailed(EmbeddingError):
    code = "verification_failed"
