"""Flag-qubit repetition-code memory experiments on a heavy-hex device model."""

from .pauli import CodeLayout, ParameterError, PauliString, anticommutes, build_layout
from .circuit import CircuitProgram, Instruction, build_memory_experiment, parse_circuit
from .noise import CalibrationModel, attach_noise, load_bundled, load_calibration
from .frame import sample, trace_error
from .syndrome import compute_syndromes
from .graph import MatchingGraph, build_hardware_graph, build_sample_graph
from .decoder import Decoder, decode_batch
from .pipeline import run_memory

__version__ = "0.1.0"
