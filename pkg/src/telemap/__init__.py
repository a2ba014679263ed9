"""Quantum circuit mapping that moves qubits by SWAP or by teleportation through idle Bell pairs."""

from .arch import CouplingMap, line_map, load_map, tokyo_map, virtual_edges
from .ir import Circuit, Gate, Layer, partition_layers
from .lowering import (RoutedProgram, eliminate_dead_channels, establish_channel, lower_swap,
                       lower_teleport)
from .qasm import QasmError, emit, parse
from .router import (EQUAL, IBM, Channel, CostModel, MappingState, Move, apply_swap,
                     apply_teleport, bridge_plan, cost_model, initial_mapping, move_cost,
                     route_circuit, route_layer)
from .verify import check_coupling, check_equivalence, simulate_branching

__version__ = "0.1.0"
