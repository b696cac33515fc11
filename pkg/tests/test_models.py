"""Model registry: exact printed formulas, variants, invariants, serialization."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from painleve_d32 import models
from painleve_d32.models import (
    UnknownModelError,
    dump_models,
    load_integral,
    load_map,
    load_model,
    load_particular_solution,
    reserialize_dump,
)
from painleve_d32.ring import RatExpr, substitute, syms

GOLDEN = Path(__file__).parent / "golden_models.txt"


def test_all_ids_load():
    for sid in models.SYSTEM_IDS:
        assert load_model(sid).id == sid
    for mid in models.MAP_IDS:
        assert load_map(mid).id == mid
    for iid in models.INTEGRAL_IDS:
        assert load_integral(iid).id == iid
    for pid in models.SOLUTION_IDS:
        assert load_particular_solution(pid).id == pid


def test_unknown_ids_raise():
    with pytest.raises(UnknownModelError):
        load_model("six_dim")
    with pytest.raises(UnknownModelError):
        load_map("s3_5d")
    with pytest.raises(UnknownModelError):
        load_integral("I3")
    with pytest.raises(UnknownModelError):
        load_particular_solution("nope")


def test_corrected_only_for_disputed():
    for mid in models.DISPUTED_MAP_IDS:
        assert load_map(mid, "corrected").variant == "corrected"
    with pytest.raises(UnknownModelError):
        load_map("s0_5d", "corrected")
    with pytest.raises(UnknownModelError):
        load_map("pi_4d", "corrected")


def test_five_dim_shape():
    five = load_model("five_dim")
    assert five.state == ("x", "y", "z", "w", "q")
    assert five.indep == "t"
    assert five.relation
    allowed = set(five.state) | {"t", "alpha0", "alpha1", "alpha2", "eta"}
    for name in five.state:
        rhs = five.rhs[name]
        assert rhs.is_polynomial
        assert set(rhs.num.occurring_names()) <= allowed
        assert rhs.num.total_degree(five.state) <= 3


def test_ham_4d_hamiltonian_identity():
    # 2s*H + (q1^2 p1^2 - 2 a2 q1 p1 - q1)
    #      + (q2^2 p2^2 + 2(a1+a2) q2 p2 + eta s q2) + 2 p1 p2 = 0
    ham = load_model("ham_4d")
    T = ham.table
    q1, p1, q2, p2, s, a1, a2, eta = syms(T, "q1 p1 q2 p2 s alpha1 alpha2 eta")
    H = ham.hamiltonian.expr
    lhs = (
        2 * s * H
        + (q1**2 * p1**2 - 2 * a2 * q1 * p1 - q1)
        + (q2**2 * p2**2 + 2 * (a1 + a2) * q2 * p2 + eta * s * q2)
        + 2 * p1 * p2
    )
    assert lhs.is_zero or lhs.equals(0)


def test_k1_is_restriction_of_H():
    ham = load_model("ham_4d")
    k1 = load_model("K1_sys")
    T = ham.table
    restricted = substitute(ham.hamiltonian.expr, {"q2": 0, "p2": 0})
    rebased = substitute(
        k1.hamiltonian.expr,
        {
            "q1": RatExpr.sym(T, "q1"),
            "p1": RatExpr.sym(T, "p1"),
            "s": RatExpr.sym(T, "s"),
            "alpha": RatExpr.sym(T, "alpha2"),
        },
        table=T,
    )
    assert restricted.equals(rebased)


def test_disputed_variants_differ_in_one_place():
    five_table = load_model("five_dim").table
    x, a0, a2 = syms(five_table, "x alpha0 alpha2")
    for mid in ("s2_5d", "chart2"):
        printed = load_map(mid, "printed")
        corrected = load_map(mid, "corrected")
        same = [n for n in printed.var_map if printed.var_map[n] == corrected.var_map[n]]
        assert set(printed.var_map) - set(same) == {"w"}
        delta = printed.var_map["w"] - corrected.var_map["w"]
        sign = 1 if mid == "s2_5d" else -1
        assert delta.equals(sign * 2 * (a0 - a2) / x)
        assert (printed.eta_sign, printed.indep_sign) == (
            corrected.eta_sign, corrected.indep_sign
        )
    printed = load_map("s2_4d", "printed")
    corrected = load_map("s2_4d", "corrected")
    assert printed.var_map == corrected.var_map
    assert printed.eta_sign == -1 and corrected.eta_sign == +1
    assert printed.indep_sign == corrected.indep_sign == -1


def test_param_actions_preserve_normalization():
    # column sums 1 and zero offset sum keep alpha0+alpha1+alpha2 = 1
    for mid in models.MAP_IDS:
        m = load_map(mid)
        n = len(m.param_names)
        for j in range(n):
            assert sum(m.param_matrix[i][j] for i in range(n)) == 1, mid
        assert sum(m.param_offset) == 0, mid


def test_map_denominators_are_monomials_or_printed():
    ham_table = load_model("ham_4d").table
    q1, q2 = syms(ham_table, "q1 q2")
    allowed_poly = (q1 * q2 + 1).num
    for mid in models.MAP_IDS:
        variants = ("printed", "corrected") if mid in models.DISPUTED_MAP_IDS \
            else ("printed",)
        for variant in variants:
            m = load_map(mid, variant)
            for name, expr in m.var_map.items():
                den = expr.den
                assert len(den.terms) == 1 or den == allowed_poly, (mid, name)


def test_generator_signs():
    assert load_map("s0_5d").eta_sign == -1
    assert load_map("s0_5d").indep_sign == +1
    assert load_map("s1_5d").eta_sign == +1
    assert load_map("s2_5d").eta_sign == -1
    assert load_map("s0_4d").indep_sign == -1
    assert load_map("s0_4d").eta_sign == +1
    assert load_map("s2_4d").indep_sign == -1
    assert load_map("pi_4d").eta_sign == +1
    assert load_map("pi_4d").indep_sign == +1
    # the diagram automorphism swaps the outer parameters
    assert load_map("pi_4d").param_matrix == ((0, 0, 1), (0, 1, 0), (1, 0, 0))


def test_s1_var_map_printed_form():
    m = load_map("s1_5d")
    T = load_model("five_dim").table
    x, y, w, q, a1 = syms(T, "x y w q alpha1")
    assert m.var_map["x"].equals(x + a1 * q / y)
    assert m.var_map["z"].equals(RatExpr.sym(T, "z") + a1 * w / y)
    assert m.var_map["y"] == y and m.var_map["q"] == q


def test_integral_registry():
    ywq = load_integral("ywq")
    assert ywq.lam == Fraction(-1) and ywq.system_id == "five_dim"
    i1 = load_integral("I1")
    assert i1.lam == 0 and i1.system_id == "K1_sys"
    i2 = load_integral("I2")
    assert i2.lam == 0 and i2.system_id == "tildeK2_sys"
    # I2 carries the eta * x1 term with coefficient one
    table = i2.expr.table
    mono = [0] * len(table)
    mono[table.index("x1")] = 1
    mono[table.index("eta")] = 1
    assert dict(i2.expr.num.terms)[tuple(mono)] == 1


def test_solution_bindings_printed_forms():
    sol = load_particular_solution("linear_xz_sol")
    C1, C2, E1, E2, a0, a2, eta = syms(sol.table, "C1 C2 E1 E2 alpha0 alpha2 eta")
    assert sol.bindings["x"].equals(C1 * E1 - 1 / (2 * a2))
    assert sol.bindings["z"].equals(C2 * E2 + eta / (2 * a0))
    assert sol.rules["E1"].equals(a2 * E1)
    assert sol.rules["E2"].equals(a0 * E2)

    sol_a = load_particular_solution("second_order_sol_a")
    C1a, E, a2a = syms(sol_a.table, "C1 E alpha2")
    assert sol_a.bindings["x"].equals(((E - a2a) ** 2 - C1a**2) / (4 * C1a**2 * E))
    assert sol_a.rules["E"].equals(C1a * E)

    rest = load_particular_solution("rest_wq_zero")
    assert rest.param_bindings["alpha1"].is_zero
    for name in ("y", "w", "q"):
        assert rest.bindings[name].is_zero
    # the carrier rules are exactly the linear-subsystem right-hand sides
    lin = load_model("linear_xz")
    T5 = rest.table
    rebased = {
        n: substitute(
            lin.rhs[n], {m: RatExpr.sym(T5, m) for m in lin.table.symbols}, table=T5
        )
        for n in ("x", "z")
    }
    assert rest.rules["x"].equals(rebased["x"])
    assert rest.rules["z"].equals(rebased["z"])


def test_solution_bindings_cover_states():
    for pid in models.SOLUTION_IDS:
        sol = load_particular_solution(pid)
        target = load_model(sol.system_id)
        assert set(target.state) <= set(sol.bindings)


def test_dump_roundtrip_bit_exact():
    text = dump_models()
    assert reserialize_dump(text) == text


def test_dump_matches_golden():
    assert dump_models() == GOLDEN.read_text()
