import math
from enum import Enum


class EvolutionMode(str, Enum):
    IMAGINARY = "imaginary"
    REAL = "real"


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    RZZ = "RZZ"
    CX = "CX"


class AnsatzFamily(str, Enum):
    EFFICIENT_SU2 = "efficient_su2"
    ALTERNATING_XY = "alternating_xy"


class Entangler(str, Enum):
    PAIRWISE_CX = "pairwise_cx"
    CHAIN_RZZ = "chain_rzz"


class GradientKind(str, Enum):
    PARAMETER_SHIFT = "parameter_shift"
    DERIVATIVE_STATE = "derivative_state"


class CostTag(str, Enum):
    PSR = "PSR"
    LCU = "LCU"


class RegularizationKind(str, Enum):
    DIAGONAL_SHIFT = "diagonal_shift"
    TRUNCATED_SVD = "truncated_svd"
    L_CURVE = "l_curve"


class MethodTag(str, Enum):
    VARQITE_PSR = "VarQITE-PSR"
    VARQITE_LCU = "VarQITE-LCU"
    VARQRTE_LCU = "VarQRTE-LCU"
    DUALQITE_PSR = "DualQITE-PSR"
    DUALQITE_LCU = "DualQITE-LCU"
    DUALQRTE_LCU = "DualQRTE-LCU"


class Basis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


class BasisSchedule(str, Enum):
    ALTERNATING_XY = "alternating_XY"
    FIXED = "fixed"


class EvolverKind(str, Enum):
    DUAL = "dualqte"
    VARQTE = "varqte"
    EXACT = "exact"


class Topology(str, Enum):
    CIRCLE = "circle"
    CHAIN = "chain"


class InitialState(str, Enum):
    PLUS_ALL = "plus_all"
    PRODUCT = "product"


class ExperimentKind(str, Enum):
    EVOLVE_IMAG = "evolve_imag"
    EVOLVE_REAL = "evolve_real"
    QMETTS = "qmetts"
    SIZE_SCALING = "size_scaling"
    ILLUSTRATIVE_1Q = "illustrative_1q"
    PRODUCT_STATE_DIAGNOSTIC = "product_state_diagnostic"
    RUNTIME_TABLE = "runtime_table"


MAX_QUBITS = 20
DENSE_MAX_QUBITS = 14

DEFAULT_SHIFT = math.pi / 2
NORM_TOLERANCE = 1e-10
PROBABILITY_TOLERANCE = 1e-9
NEGATIVE_CLAMP_TOLERANCE = 1e-9
TIME_GRID_TOLERANCE = 1e-6

L_CURVE_DEFAULT_POINTS = 16
L_CURVE_DEFAULT_MIN = 1e-6
L_CURVE_DEFAULT_MAX = 1e-1

# Superconducting-device timings in nanoseconds.
DEFAULT_T_CX_NS = 451.0
DEFAULT_T_SQRT_X_NS = 36.0
DEFAULT_T_MEAS_NS = 860.0
DEFAULT_T_RESET_NS = 2000.0

# Measured size-scaling anchors at n=12, d=120 used for runtime projections.
RUNTIME_ANCHOR_D = 120
RUNTIME_ANCHORS = {
    MethodTag.VARQITE_PSR: (1.3e10, 3.56),
    MethodTag.DUALQITE_PSR: (3.5e9, 2.29),
}

DEFAULT_REPLICAS = 5
SEED_STREAMS = ("evolution", "shots", "metts-chain", "diagnostics")
