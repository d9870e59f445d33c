from enum import Enum


class Status(Enum):
    INVALID_ARGUMENT = 2001
    DIMENSION_MISMATCH = 2002
    SIZE_LIMIT = 2003

    UNSUPPORTED_ANSATZ = 3001
    INCOMPATIBLE_METHOD = 3002

    SINGULAR_SYSTEM = 4001
    NUMERICAL_ABORT = 4002

    CONFIG_ERROR = 5001
