import pytest
from hypothesis import given, strategies as st

from flagrep.circuit import (CircuitError, CircuitProgram, Instruction, build_extraction_round,
                             build_memory_experiment, data_measurement_slots, logical_value, parse_circuit,
                             round_measurement_slots, validate_schedule)
from flagrep.frame import reference_record
from flagrep.noise import CalibrationModel, attach_noise
from flagrep.pauli import ParameterError, build_layout


def layers(prog):
    return [[prog.instructions[i] for i in layer] for layer in prog.step_schedule]


def test_instruction_validation():
    with pytest.raises(CircuitError):
        Instruction("CNOT", (1, 1))
    with pytest.raises(CircuitError):
        Instruction("H", (0, 1))
    with pytest.raises(CircuitError):
        Instruction("DEPOL1", (0,), 1.5)
    with pytest.raises(CircuitError):
        Instruction("H", (0,), 0.1)
    with pytest.raises(CircuitError):
        Instruction("SWAP", (0, 1))
    with pytest.raises(CircuitError):
        CircuitProgram(2, [Instruction("H", (2,))])


def test_round_fragments():
    r = build_extraction_round(build_layout(3, 1))
    assert r.num_measurements == 6
    r = build_extraction_round(build_layout(3, 0))
    assert r.count("CNOT") == 4 and r.num_measurements == 2 and r.count("H") == 0
    r = build_extraction_round(build_layout(9, 2))
    assert len(r.step_schedule) == 9
    assert len(build_extraction_round(build_layout(5, 1)).step_schedule) == 7
    assert len(build_extraction_round(build_layout(5, 0, "X")).step_schedule) == 5


@pytest.mark.parametrize("d,f,R,state,m", [(3, 1, 3, "0", 21), (9, 2, 10, "1", 409),
                                           (3, 0, 1, "0", 5), (5, 2, 2, "+", 45)])
def test_measurement_counts(d, f, R, state, m):
    lay = build_layout(d, f, "Z" if state in "01" else "X")
    assert build_memory_experiment(lay, R, state).num_measurements == m


@given(st.integers(3, 9), st.integers(0, 2), st.sampled_from("01+-"), st.integers(1, 4))
def test_schedule_and_reference(d, f, state, R):
    lay = build_layout(d, f, "Z" if state in "01" else "X")
    prog = build_memory_experiment(lay, R, state)
    validate_schedule(prog)
    assert sorted(prog.measurement_index.values()) == list(range(prog.num_measurements))
    ref = reference_record(prog)
    data = data_measurement_slots(lay, R)
    anc = [i for i in range(prog.num_measurements) if i not in set(data)]
    assert not ref[anc].any()
    assert (ref[data] == logical_value(state)).all()
    # every ancilla is measured once per round, data once at the end
    slots = round_measurement_slots(lay, R)
    assert len(slots) == R
    assert all(sorted(s) == sorted(q for i in range(d - 1) for q in lay.patch(i)) for s in slots)
    qs = prog.measurement_qubits()
    assert [qs[i] for i in data] == list(lay.data_qubits)


def test_schedule_rejects_collisions():
    bad = CircuitProgram(3, [Instruction("CNOT", (0, 1)), Instruction("H", (1,)),
                             Instruction("TICK")])
    with pytest.raises(CircuitError):
        validate_schedule(bad)
    ok = CircuitProgram(1, [Instruction("MEASURE", (0,)), Instruction("RESET", (0,)),
                            Instruction("TICK")])
    validate_schedule(ok)


def test_state_basis_mismatch():
    with pytest.raises(ParameterError):
        build_memory_experiment(build_layout(3, 0, "Z"), 2, "+")
    with pytest.raises(ParameterError):
        build_memory_experiment(build_layout(3, 0, "Z"), 0, "0")


@given(st.integers(3, 5), st.integers(0, 2), st.sampled_from("01+-"), st.integers(1, 2),
       st.floats(0, 0.3))
def test_text_round_trip_and_strip(d, f, state, R, p):
    lay = build_layout(d, f, "Z" if state in "01" else "X")
    ideal = build_memory_experiment(lay, R, state)
    n = lay.n_qubits
    calib = CalibrationModel.uniform(range(n), [(q, q + 1) for q in range(n - 1)],
                                     sx=p, x=p, readout=p, idle=p, ecr=p)
    noisy = attach_noise(ideal, calib)
    again = parse_circuit(noisy.to_text())
    assert again == noisy
    assert again.digest() == noisy.digest()
    assert noisy.ideal() == ideal


def test_parse_errors():
    with pytest.raises(CircuitError):
        parse_circuit("# qubits 2\nFOO 1\n")
    with pytest.raises(CircuitError):
        parse_circuit("# qubits 2\nCNOT 0\n")
