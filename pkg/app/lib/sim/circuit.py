import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import (
    AnsatzFamily,
    Basis,
    Entangler,
    GateKind,
    InitialState,
    MAX_QUBITS,
)
from app.constants.status import Status
from app.lib.exception import QTEException
from app.lib.sim.statevector import GENERATORS, StateVector, apply_matrix, gate_matrix

ROTATION_KINDS = (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ)
SUPPORTED_ROT_PAIRS = ((GateKind.RY, GateKind.RZ), (GateKind.RX, GateKind.RZ))


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: Tuple[int, ...]
    parameter_slot: Optional[int] = None

    def __post_init__(self):
        arity = 2 if self.kind in (GateKind.RZZ, GateKind.CX) else 1
        if len(self.targets) != arity:
            raise QTEException(
                Status.INVALID_ARGUMENT, f"{self.kind.value} acts on {arity} qubit(s), got {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise QTEException(
                Status.INVALID_ARGUMENT, f"{self.kind.value} targets must be distinct, got {self.targets}"
            )
        if self.kind in ROTATION_KINDS and self.parameter_slot is None:
            raise QTEException(Status.INVALID_ARGUMENT, f"{self.kind.value} needs a parameter slot")
        if self.kind == GateKind.CX and self.parameter_slot is not None:
            raise QTEException(Status.INVALID_ARGUMENT, "CX carries no parameter")

    @property
    def parameterized(self) -> bool:
        return self.parameter_slot is not None


class AnsatzSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_qubits: int = Field(ge=1, le=MAX_QUBITS)
    repetitions: int = Field(default=3, ge=0)
    family: AnsatzFamily = AnsatzFamily.EFFICIENT_SU2
    rot_pair: Tuple[GateKind, GateKind] = (GateKind.RY, GateKind.RZ)
    entangler: Entangler = Entangler.PAIRWISE_CX
    final_rotation_layer: bool = True

    @model_validator(mode="after")
    def _check_rot_pair(self):
        if self.family == AnsatzFamily.EFFICIENT_SU2 and tuple(self.rot_pair) not in SUPPORTED_ROT_PAIRS:
            raise ValueError(f"rot_pair must be one of {SUPPORTED_ROT_PAIRS}, got {self.rot_pair}")
        return self

    @property
    def rotation_layers(self) -> int:
        return self.repetitions + (1 if self.final_rotation_layer else 0)

    def with_rot_pair(self, rot_pair: Tuple[GateKind, GateKind]) -> "AnsatzSpec":
        return self.model_copy(update={"rot_pair": rot_pair})


@dataclass
class ParameterizedCircuit:
    """An ordered gate list over ``n_qubits`` with ``n_slots`` rotation angles.

    Slot values are obtained from the free parameters as ``parameter_map @ theta``
    when a map is given, so several gates can share one parameter while every slot
    is still used by exactly one rotation.
    """

    n_qubits: int
    gates: List[Gate]
    spec: Optional[AnsatzSpec] = None
    parameter_map: Optional[np.ndarray] = None
    # Gate indices of each rotation layer, used by initial-state bindings.
    rotation_layer_gates: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise QTEException(Status.SIZE_LIMIT, f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        slots = []
        for gate in self.gates:
            if any(q >= self.n_qubits for q in gate.targets):
                raise QTEException(Status.INVALID_ARGUMENT, f"gate {gate} exceeds {self.n_qubits} qubits")
            if gate.parameterized:
                slots.append(gate.parameter_slot)
        if sorted(slots) != list(range(len(slots))):
            raise QTEException(Status.INVALID_ARGUMENT, "parameter slots must be 0..n_slots-1, each used exactly once")
        self.n_slots = len(slots)
        self._slot_gate = {gate.parameter_slot: i for i, gate in enumerate(self.gates) if gate.parameterized}
        if self.parameter_map is not None:
            self.parameter_map = np.asarray(self.parameter_map, dtype=float)
            if self.parameter_map.ndim != 2 or self.parameter_map.shape[0] != self.n_slots:
                raise QTEException(
                    Status.DIMENSION_MISMATCH,
                    f"parameter map must have {self.n_slots} rows, got shape {self.parameter_map.shape}",
                )

    @classmethod
    def from_gates(
        cls,
        n_qubits: int,
        gates: Iterable[Gate],
        parameter_map: Optional[np.ndarray] = None,
    ) -> "ParameterizedCircuit":
        return cls(n_qubits=n_qubits, gates=list(gates), parameter_map=parameter_map)

    @property
    def d(self) -> int:
        if self.parameter_map is None:
            return self.n_slots
        return int(self.parameter_map.shape[1])

    @property
    def parameter_shift_compatible(self) -> bool:
        return all(g.kind in ROTATION_KINDS for g in self.gates if g.parameterized)

    def slot_values(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.d:
            raise QTEException(Status.DIMENSION_MISMATCH, f"expected {self.d} parameters, got {theta.shape[0]}")
        if self.parameter_map is None:
            return theta.copy()
        return self.parameter_map @ theta

    def pull_back(self, slot_vector: np.ndarray) -> np.ndarray:
        """Chain rule from slot-level derivatives to parameter-level ones."""
        if self.parameter_map is None:
            return np.asarray(slot_vector)
        return self.parameter_map.T @ slot_vector

    def pull_back_matrix(self, slot_matrix: np.ndarray) -> np.ndarray:
        if self.parameter_map is None:
            return np.asarray(slot_matrix)
        return self.parameter_map.T @ slot_matrix @ self.parameter_map

    def _apply_gate(self, amplitudes: np.ndarray, gate: Gate, slots: np.ndarray) -> np.ndarray:
        angle = slots[gate.parameter_slot] if gate.parameterized else 0.0
        return apply_matrix(amplitudes, self.n_qubits, gate_matrix(gate.kind, angle), gate.targets)

    def run_slots(self, slots: np.ndarray) -> StateVector:
        slots = np.asarray(slots, dtype=float)
        if slots.shape[0] != self.n_slots:
            raise QTEException(Status.DIMENSION_MISMATCH, f"expected {self.n_slots} slot values, got {slots.shape[0]}")
        amplitudes = StateVector.zero(self.n_qubits).amplitudes
        for gate in self.gates:
            amplitudes = self._apply_gate(amplitudes, gate, slots)
        return StateVector(self.n_qubits, amplitudes)

    def run(self, theta: np.ndarray) -> StateVector:
        return self.run_slots(self.slot_values(theta))

    def slot_derivative_states(self, slots: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Exact |d phi / d s_k> for every slot by generator insertion.

        Returns ``(psi, derivatives)`` with ``derivatives[k]`` the amplitudes of the
        derivative with respect to slot k.
        """
        slots = np.asarray(slots, dtype=float)
        amplitudes = StateVector.zero(self.n_qubits).amplitudes
        derivatives = np.zeros((self.n_slots, 2 ** self.n_qubits), dtype=complex)
        branches: List[Tuple[int, np.ndarray]] = []
        for gate in self.gates:
            amplitudes = self._apply_gate(amplitudes, gate, slots)
            branches = [(k, self._apply_gate(branch, gate, slots)) for k, branch in branches]
            if gate.parameterized:
                inserted = apply_matrix(amplitudes, self.n_qubits, -0.5j * GENERATORS[gate.kind], gate.targets)
                branches.append((gate.parameter_slot, inserted))
        for k, branch in branches:
            derivatives[k] = branch
        return amplitudes, derivatives

    def shifted_overlaps(self, bra: np.ndarray, slots: np.ndarray, shift: float) -> Tuple[np.ndarray, np.ndarray]:
        """<bra|phi(slots + shift e_k)> and <bra|phi(slots - shift e_k)> for every slot k.

        One backward sweep: at gate k the ket holds the prefix state before the gate and
        the bra holds the suffix-propagated ``bra``.
        """
        slots = np.asarray(slots, dtype=float)
        ket = self.run_slots(slots).amplitudes
        bra = np.asarray(bra, dtype=complex)
        plus = np.zeros(self.n_slots, dtype=complex)
        minus = np.zeros(self.n_slots, dtype=complex)
        for gate in reversed(self.gates):
            angle = slots[gate.parameter_slot] if gate.parameterized else 0.0
            inverse = gate_matrix(gate.kind, angle).conj().T
            ket = apply_matrix(ket, self.n_qubits, inverse, gate.targets)
            if gate.parameterized:
                k = gate.parameter_slot
                shifted_up = apply_matrix(ket, self.n_qubits, gate_matrix(gate.kind, angle + shift), gate.targets)
                shifted_down = apply_matrix(ket, self.n_qubits, gate_matrix(gate.kind, angle - shift), gate.targets)
                plus[k] = np.vdot(bra, shifted_up)
                minus[k] = np.vdot(bra, shifted_down)
            bra = apply_matrix(bra, self.n_qubits, inverse, gate.targets)
        return plus, minus

    def slot_order(self) -> np.ndarray:
        """Gate position of every slot."""
        return np.array([self._slot_gate[k] for k in range(self.n_slots)], dtype=int)

    def derivative_states(self, theta: np.ndarray) -> Tuple[StateVector, np.ndarray]:
        """|phi(theta)> and the parameter-level derivative amplitudes, shape (d, 2^n)."""
        psi, slot_derivatives = self.slot_derivative_states(self.slot_values(theta))
        if self.parameter_map is not None:
            slot_derivatives = self.parameter_map.T @ slot_derivatives
        return StateVector(self.n_qubits, psi), slot_derivatives

    def gate_kinds(self) -> List[str]:
        return [gate.kind.value for gate in self.gates]


def _pairwise_cx(n_qubits: int) -> List[Gate]:
    # Depth two: (0,1),(2,3),... then (1,2),(3,4),...
    even = [Gate(GateKind.CX, (q, q + 1)) for q in range(0, n_qubits - 1, 2)]
    odd = [Gate(GateKind.CX, (q, q + 1)) for q in range(1, n_qubits - 1, 2)]
    return even + odd


def build_ansatz(spec: AnsatzSpec) -> ParameterizedCircuit:
    """Layered hardware-efficient circuit for ``spec``.

    EfficientSU2: each rotation layer is a full rot_pair[0] layer followed by a full RZ
    layer, separated by depth-two pairwise CX entanglers. AlternatingXY: single-axis
    rotation layers alternating RX, RY, RX, ... separated by parameterized RZZ chains.
    """
    combos = {
        AnsatzFamily.EFFICIENT_SU2: Entangler.PAIRWISE_CX,
        AnsatzFamily.ALTERNATING_XY: Entangler.CHAIN_RZZ,
    }
    if combos[spec.family] != spec.entangler:
        raise QTEException(
            Status.UNSUPPORTED_ANSATZ,
            f"unsupported combination {spec.family.value} + {spec.entangler.value}",
        )

    n = spec.n_qubits
    gates: List[Gate] = []
    layers: List[List[int]] = []
    slot = 0

    def rotation_layer(kinds: Sequence[GateKind]):
        nonlocal slot
        layer = []
        for kind in kinds:
            for q in range(n):
                layer.append(len(gates))
                gates.append(Gate(kind, (q,), slot))
                slot += 1
        layers.append(layer)

    def entangler():
        nonlocal slot
        if spec.entangler == Entangler.PAIRWISE_CX:
            gates.extend(_pairwise_cx(n))
            return
        for q in range(n - 1):
            gates.append(Gate(GateKind.RZZ, (q, q + 1), slot))
            slot += 1

    def layer_kinds(index: int) -> Sequence[GateKind]:
        if spec.family == AnsatzFamily.EFFICIENT_SU2:
            return tuple(spec.rot_pair)
        return (GateKind.RX,) if index % 2 == 0 else (GateKind.RY,)

    for rep in range(spec.repetitions):
        rotation_layer(layer_kinds(rep))
        entangler()
    if spec.final_rotation_layer:
        rotation_layer(layer_kinds(spec.repetitions))

    return ParameterizedCircuit(n_qubits=n, gates=gates, spec=spec, rotation_layer_gates=layers)


def run_circuit(circuit: ParameterizedCircuit, theta: np.ndarray) -> StateVector:
    return circuit.run(theta)


# Final-layer angles per (basis, outcome bit): (first rotation, RZ).
_PRODUCT_ANGLES = {
    (Basis.X, "0"): (GateKind.RY, math.pi / 2, 0.0),
    (Basis.X, "1"): (GateKind.RY, -math.pi / 2, 0.0),
    (Basis.Y, "0"): (GateKind.RX, math.pi / 2, math.pi),
    (Basis.Y, "1"): (GateKind.RX, math.pi / 2, 0.0),
    (Basis.Z, "0"): (GateKind.RY, 0.0, 0.0),
    (Basis.Z, "1"): (GateKind.RY, math.pi, 0.0),
}


def initial_parameter_binding(
    circuit: ParameterizedCircuit,
    target: InitialState,
    basis: Optional[Basis] = None,
    outcome: Optional[str] = None,
) -> np.ndarray:
    """Parameters that make ``circuit`` prepare a named product state.

    ``plus_all`` sets the RY angles of the last rotation layer to pi/2. ``product``
    prepares the eigenstates of ``basis`` selected by ``outcome`` (character k is
    qubit k; "0" is the +1 eigenstate). All other parameters are zero.
    """
    if circuit.parameter_map is not None or not circuit.rotation_layer_gates:
        raise QTEException(Status.UNSUPPORTED_ANSATZ, "bindings need a layered ansatz built by build_ansatz")
    spec = circuit.spec
    if spec is None or not spec.final_rotation_layer:
        raise QTEException(Status.UNSUPPORTED_ANSATZ, "bindings need a final rotation layer")

    theta = np.zeros(circuit.d)
    last_layer = [circuit.gates[i] for i in circuit.rotation_layer_gates[-1]]
    by_kind = {}
    for gate in last_layer:
        by_kind[(gate.kind, gate.targets[0])] = gate.parameter_slot

    if target == InitialState.PLUS_ALL:
        if not any(kind == GateKind.RY for kind, _ in by_kind):
            raise QTEException(Status.UNSUPPORTED_ANSATZ, "plus_all needs RY gates in the last rotation layer")
        for q in range(circuit.n_qubits):
            theta[by_kind[(GateKind.RY, q)]] = math.pi / 2
        return theta

    if basis is None or outcome is None:
        raise QTEException(Status.INVALID_ARGUMENT, "product target needs a basis and an outcome bitstring")
    if len(outcome) != circuit.n_qubits or set(outcome) - {"0", "1"}:
        raise QTEException(Status.INVALID_ARGUMENT, f"outcome {outcome!r} is not a {circuit.n_qubits}-bit string")
    for q, bit in enumerate(outcome):
        kind, angle, rz_angle = _PRODUCT_ANGLES[(Basis(basis), bit)]
        if basis == Basis.Z and (kind, q) not in by_kind:
            kind = GateKind.RX
        if (kind, q) not in by_kind or (GateKind.RZ, q) not in by_kind:
            raise QTEException(
                Status.UNSUPPORTED_ANSATZ,
                f"{Basis(basis).value}-basis product states need {kind.value}-RZ rotation layers",
            )
        theta[by_kind[(kind, q)]] = angle
        theta[by_kind[(GateKind.RZ, q)]] = rz_angle
    return theta


def rot_pair_for_basis(basis: Basis) -> Tuple[GateKind, GateKind]:
    return (GateKind.RX, GateKind.RZ) if basis == Basis.Y else (GateKind.RY, GateKind.RZ)
