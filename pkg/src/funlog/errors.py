"""Exception types shared across the interpreter."""


class FunlogError(Exception):
    """Base class for all interpreter errors."""


class LexError(FunlogError):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ParseError(FunlogError):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class TypeError_(FunlogError):
    """A clause or rule does not check against the declarations.

    Named with a trailing underscore to avoid shadowing the builtin.
    """


class LoadError(FunlogError):
    """Program could not be loaded; carries the error diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msgs = "\n".join(str(d) for d in self.diagnostics)
        super().__init__(msgs or "load failed")


class EvalError(FunlogError):
    """Runtime error during solving (div by zero, apply misuse, ...)."""


class RewriteLimitError(EvalError):
    """Answer normalization exceeded the rewrite step cap.

    Signals probable divergence, e.g. an attempt to display an infinite
    data structure.
    """
