import pytest
from hypothesis import given, strategies as st

from flagrep.pauli import (ParameterError, PauliString, anticommutes, build_layout,
                           logical_operator)


def paulis(n):
    return st.tuples(st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1)).map(
        lambda xz: PauliString(n, *xz))


def P(label):
    return PauliString.from_label(label)


def test_anticommutation_examples():
    assert anticommutes(P("ZZI"), P("XII"))
    assert not anticommutes(P("ZZI"), P("XXI"))
    assert not anticommutes(P("ZZI"), P("ZIZ"))


def test_length_mismatch_raises():
    with pytest.raises(ValueError):
        anticommutes(P("ZZ"), P("XII"))


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n))))
def test_symplectic_product_properties(abc):
    a, b, c = abc
    assert anticommutes(a, b) == anticommutes(b, a)
    assert not anticommutes(a, a)
    # bilinearity over products
    assert anticommutes(a * b, c) == (anticommutes(a, c) ^ anticommutes(b, c))


@given(st.integers(1, 10).flatmap(paulis))
def test_label_round_trip(p):
    assert PauliString.from_label(p.label()) == p
    assert p.is_identity == (p.label() == "I" * p.n)


@pytest.mark.parametrize("d,f,total", [(9, 2, 49), (9, 1, 33), (3, 0, 5), (5, 1, 17)])
def test_qubit_totals(d, f, total):
    lay = build_layout(d, f)
    assert lay.n_qubits == total
    assert len(lay.data_qubits) == d
    assert len(lay.syndrome_qubits) == d - 1
    assert lay.n_flag == 2 * f * (d - 1)


@given(st.integers(3, 25), st.integers(0, 2), st.sampled_from("ZX"))
def test_layout_invariants(d, f, basis):
    lay = build_layout(d, f, basis)
    assert lay.n_qubits == d + (d - 1) + 2 * f * (d - 1)
    roles = lay.qubit_roles
    assert roles.count("data") == d and roles.count("flag") == lay.n_flag
    for i, s in enumerate(lay.stabilizers):
        assert s.support() == (lay.data_qubits[i], lay.data_qubits[i + 1])
        assert set(s.label().replace("I", "")) == {basis}
    # flags sit between the syndrome and its data neighbours, closest first
    for i in range(d - 1):
        S = lay.syndrome_qubits[i]
        assert lay.left_flags[i] == tuple(range(S - 1, S - 1 - f, -1))
        assert lay.right_flags[i] == tuple(range(S + 1, S + 1 + f))
        assert lay.data_qubits[i] < min(lay.patch(i)) and max(lay.patch(i)) < lay.data_qubits[i + 1]
    logical = logical_operator(lay)
    assert all(not anticommutes(logical, s) for s in lay.stabilizers)


def test_small_layout_stabilizers():
    lay = build_layout(3, 0)
    assert [s.label() for s in lay.stabilizers] == ["ZIZII", "IIZIZ"]
    assert logical_operator(lay).label() == "ZIZIZ"
    assert logical_operator(build_layout(3, 0, "X")).label() == "XIXIX"


@pytest.mark.parametrize("args", [(2, 0), (3, 3), (3, -1)])
def test_bad_parameters(args):
    with pytest.raises(ParameterError):
        build_layout(*args)
    with pytest.raises(ParameterError):
        build_layout(3, 0, "Y")
