"""Exception hierarchy shared across the pipeline.

DataError covers malformed annotations, feature files and missing inputs;
NumericalError covers optimizer breakdown (divergence, non-finite loss).
The CLI maps them to distinct exit codes.
"""


class PedintentError(Exception):
    pass


class DataError(PedintentError):
    pass


class NumericalError(PedintentError):
    pass


class UsageError(PedintentError):
    pass
