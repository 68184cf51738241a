"""Shared exception types.

``InvalidInput`` covers contract violations (bad indices, malformed
documents, out-of-range parameters).  ``Infeasible`` is a refusal: the
request is well-formed but exceeds a size guard; the message always names
the guard so callers can adjust.
"""


class InvalidInput(ValueError):
    pass


class Infeasible(RuntimeError):
    pass
