"""Exception hierarchy shared by every lrmt module."""


class LrmtError(Exception):
    """Base class for all toolkit errors."""


class ResourceError(LrmtError):
    pass


class ParseError(ResourceError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class EmptyResourceError(ResourceError):
    pass


class EncodingError(ResourceError):
    def __init__(self, path, offset, reason=""):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{path}: invalid UTF-8 at byte offset {offset}" + (f" ({reason})" if reason else ""))


class AlignmentError(ResourceError):
    def __init__(self, message, source_count=None, target_count=None):
        self.source_count = source_count
        self.target_count = target_count
        super().__init__(message)


class ResourceMismatchError(ResourceError):
    """Loaded resource disagrees with its manifest metadata."""


class ResourceDisabledError(LrmtError):
    """A prompt component was requested but its resource is unusable or missing."""


class BudgetError(LrmtError):
    def __init__(self, estimate, budget, reserve, section_sizes):
        self.estimate = estimate
        self.budget = budget
        self.reserve = reserve
        self.section_sizes = dict(section_sizes)
        sizes = ", ".join(f"{k}={v}" for k, v in self.section_sizes.items())
        super().__init__(
            f"prompt needs ~{estimate} tokens but only {budget - reserve} are available "
            f"(budget {budget}, output reserve {reserve}); sections: {sizes}"
        )


class SingularityError(LrmtError):
    def __init__(self, columns, message=None):
        self.columns = list(columns)
        super().__init__(message or f"design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


class BackendError(LrmtError):
    pass


class TransportError(BackendError):
    pass


class CredentialError(BackendError):
    pass


class EmptyResponseError(BackendError):
    pass


class ManifestError(LrmtError):
    pass
