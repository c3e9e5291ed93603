import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nn2logic.aig import AigGraph, lower_netlist, simulate_aig
from nn2logic.fixedpoint import FixedPointFormat, from_int
from nn2logic.netlist import Netlist, build_neuron
from nn2logic.sat import (
    CnfFormula,
    check_equivalence,
    find_onset_vector,
    solve,
    to_dimacs,
    tseitin,
)


def brute_force_sat(num_vars: int, clauses) -> bool:
    """Bitset enumeration over all 2**num_vars assignments."""
    n = 1 << num_vars
    idx = np.arange(n, dtype=np.uint64)
    var_bits = [((idx >> np.uint64(v)) & np.uint64(1)).astype(bool) for v in range(num_vars)]
    ok = np.ones(n, dtype=bool)
    for cl in clauses:
        cl_sat = np.zeros(n, dtype=bool)
        for d in cl:
            bits = var_bits[abs(d) - 1]
            cl_sat |= bits if d > 0 else ~bits
        ok &= cl_sat
    return bool(ok.any())


def test_simple_sat():
    f = CnfFormula(2, [[1, 2], [-1]])
    model = solve(f)
    assert model is not None
    assert model[1] is False and model[2] is True


def test_simple_unsat():
    assert solve(CnfFormula(1, [[1], [-1]])) is None


def test_empty_clause_unsat():
    assert solve(CnfFormula(1, [[]])) is None


def test_no_clauses_sat():
    assert solve(CnfFormula(3, [])) is not None


def test_formula_validation():
    with pytest.raises(ValueError):
        CnfFormula(2, [[0]])
    with pytest.raises(ValueError):
        CnfFormula(2, [[3]])


def test_to_dimacs():
    text = to_dimacs(CnfFormula(2, [[1, -2]]))
    assert text == "p cnf 2 1\n1 -2 0\n"


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_random_3cnf_matches_brute_force(data):
    num_vars = data.draw(st.integers(3, 12))
    num_clauses = data.draw(st.integers(1, 5 * num_vars))
    rng_seed = data.draw(st.integers(0, 2**31))
    rng = np.random.default_rng(rng_seed)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3) * 2 - 1
        clauses.append([int(v * s) for v, s in zip(vs, signs)])
    f = CnfFormula(num_vars, clauses)
    model = solve(f)
    assert (model is not None) == brute_force_sat(num_vars, clauses)


def test_tseitin_assignment_matches_simulation():
    g = AigGraph()
    a = g.add_input("a")
    b = g.add_input("b")
    c = g.add_input("c")
    g.add_output(g.and2(g.xor2(a, b), c))
    formula, input_map = tseitin(g, 0)
    model = solve(formula)
    assert model is not None
    bits = [int(model[input_map[k]]) for k in range(3)]
    assert simulate_aig(g, bits) == [1]


def test_find_onset_vector_constant_false():
    g = AigGraph()
    g.add_input("a")
    g.add_output(0)
    assert find_onset_vector(g, 0) is None


def test_find_onset_vector_on_neurons():
    fmt = FixedPointFormat(4, 2)
    rng = np.random.default_rng(5)
    found = 0
    for _ in range(10):
        weights = [from_int(int(w), 4) for w in rng.integers(-8, 8, size=2)]
        g = lower_netlist(build_neuron(weights, True, fmt))
        for out_idx in range(len(g.outputs)):
            vec = find_onset_vector(g, out_idx)
            if vec is not None:
                assert simulate_aig(g, vec)[out_idx] == 1
                found += 1
    assert found > 0


def test_equivalence_self():
    g = AigGraph()
    a = g.add_input()
    b = g.add_input()
    g.add_output(g.or2(a, b))
    assert check_equivalence(g, g) is None


def test_equivalence_detects_complement():
    g = AigGraph()
    a = g.add_input()
    b = g.add_input()
    g.add_output(g.and2(a, b))
    h = AigGraph()
    a2 = h.add_input()
    b2 = h.add_input()
    h.add_output(h.and2(a2, b2) ^ 1)
    vec = check_equivalence(g, h)
    assert vec is not None
    assert simulate_aig(g, vec) != simulate_aig(h, vec)


def hand_adder(width: int) -> AigGraph:
    g = AigGraph()
    a = [g.add_input(f"a[{j}]") for j in range(width)]
    b = [g.add_input(f"b[{j}]") for j in range(width)]
    carry = 0
    for x, y in zip(a, b):
        axy = g.xor2(x, y)
        g.add_output(g.xor2(axy, carry))
        # majority via a different decomposition than the production lowering
        carry = g.or2(g.or2(g.and2(x, y), g.and2(x, carry)), g.and2(y, carry))
    return g


def test_netlist_adder_equivalent_to_hand_adder():
    net = Netlist()
    a = net.add_input(4, "a")
    b = net.add_input(4, "b")
    net.set_output(net.add_gate("ADD", (a, b)))
    lowered = lower_netlist(net)
    assert check_equivalence(lowered, hand_adder(4)) is None


def test_mismatched_interfaces_rejected():
    g = AigGraph()
    g.add_input()
    g.add_output(0)
    h = AigGraph()
    h.add_input()
    h.add_input()
    h.add_output(0)
    with pytest.raises(ValueError):
        check_equivalence(g, h)
