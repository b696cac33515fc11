"""Identity checks: positive suite, designed failures, dispute resolution.

The dispute verdicts are cross-checked against two independent routes: a
hand-expanded residual frozen here, and a from-scratch sympy expansion that
shares no code with the exact kernel.
"""

from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp

from painleve_d32 import verify
from painleve_d32.models import (
    Hamiltonian,
    VectorFieldSystem,
    load_integral,
    load_map,
    load_model,
)
from painleve_d32.ring import Derivation, is_identically_zero, syms
from painleve_d32.verify import (
    CapacityError,
    check_chart,
    check_first_integral,
    check_hamiltonian_consistency,
    check_integral_expr,
    check_invariant_divisor,
    check_particular_solution,
    check_reduction_5d_to_4d,
    check_second_order_forms,
    check_symmetry,
    check_vector_field_degree,
    first_integral_search,
    resolve_disputed,
    run_scope,
)


# -- the whole suite -------------------------------------------------------------------


def test_full_suite_passes():
    reports = run_scope("all")
    failing = [r.check_id for r in reports if not r.passed]
    assert not failing, f"failing checks: {failing}"
    assert len(reports) >= 14


def test_scope_filtering():
    reports = run_scope("integrals")
    assert [r.check_id for r in reports] == [
        "integral:five_dim:ywq", "integral:K1_sys:I1", "integral:tildeK2_sys:I2",
    ]
    with pytest.raises(ValueError):
        run_scope("everything")


def test_reports_are_idempotent():
    def strip(r):
        rec = r.to_record()
        rec.pop("millis")
        return rec

    a = [strip(r) for r in run_scope("symmetry")]
    b = [strip(r) for r in run_scope("symmetry")]
    assert a == b


# -- degree -------------------------------------------------------------------------------


def test_degrees():
    assert check_vector_field_degree("five_dim").passed
    assert check_vector_field_degree("linear_xz", expected=1).passed
    # by inspection the subsystem right-hand sides contain q1*p1^2
    assert check_vector_field_degree("K1_sys", expected=3).passed
    assert not check_vector_field_degree("linear_xz", expected=3).passed


# -- symmetry and the disputed coefficient --------------------------------------------------


def test_symmetry_positive():
    for map_id in ("s0_5d", "s1_5d"):
        assert check_symmetry("five_dim", map_id).passed
    for map_id in ("s0_4d", "s1_4d", "pi_4d"):
        assert check_symmetry("ham_4d", map_id).passed
    assert check_symmetry("ham_4d", "s2_4d", "corrected").passed
    assert check_symmetry("K2_sys", "scale_step").passed


def test_disputed_resolutions_agree():
    winners = {}
    for mid in ("s2_5d", "chart2", "s2_4d"):
        report = resolve_disputed(mid)
        assert report.passed, report.detail
        winners[mid] = report.detail.split(": ")[1]
    assert winners == {
        "s2_5d": "corrected", "chart2": "corrected", "s2_4d": "corrected"
    }


def test_printed_s2_5d_fails_with_witness():
    report = check_symmetry("five_dim", "s2_5d", "printed")
    assert not report.passed
    assert report.witness_point is not None
    assert any(text != "zero" for _, text in report.residuals)


def test_s2_5d_residual_matches_hand_expansion():
    # frozen by hand: with the printed coefficient c = alpha0 in the
    # w-component, the x-residual is 2*(alpha0 - alpha2)*x and the q-residual
    # 2*(alpha0 - alpha2)*q; the corrected coefficient alpha2 zeroes both
    five = load_model("five_dim")
    x, q, a0, a2 = syms(five.table, "x q alpha0 alpha2")
    printed = dict(verify._symmetry_residuals(
        five, five, load_map("s2_5d", "printed")
    ))
    assert printed["x"].equals(2 * (a0 - a2) * x, relation=True)
    assert printed["q"].equals(2 * (a0 - a2) * q, relation=True)
    corrected = dict(verify._symmetry_residuals(
        five, five, load_map("s2_5d", "corrected")
    ))
    for name, resid in corrected.items():
        assert is_identically_zero(resid, relation=True), name


def _sympy_five_dim(X, Y, Z, W, Q, A0, A1, A2, ETA):
    return {
        "x": -(X * W - A2) * X + sp.Rational(1, 2),
        "y": (X * W + Z * Q - 1) * Y + A1 * W * Q,
        "z": -(Z * Q - A0) * Z - ETA / 2,
        "w": (X * W - Z * Q - A2) * W + Y * Z,
        "q": (Z * Q - X * W - A0) * Q + X * Y,
    }


def test_s2_5d_residual_matches_sympy_expansion():
    # fully independent route: expand the x-component residual in sympy
    x, y, z, w, q, a0, a1, a2, eta = sp.symbols("x y z w q a0 a1 a2 eta")
    F = _sympy_five_dim(x, y, z, w, q, a0, a1, a2, eta)
    for coeff, expected in ((a0, 2 * (a0 - a2) * x), (a2, sp.Integer(0))):
        phi = {
            "x": -x,
            "y": y - 2 * a2 * q / x - q / x**2,
            "z": -z,
            "w": -w + 2 * coeff / x + 1 / x**2,
            "q": -q,
        }
        lhs = sum(
            sp.diff(phi["x"], v) * F[k]
            for k, v in zip("xyzwq", (x, y, z, w, q))
        )
        F_img = _sympy_five_dim(
            phi["x"], phi["y"], phi["z"], phi["w"], phi["q"],
            a0, a1 + 2 * a2, -a2, -eta,
        )
        residual = sp.simplify(lhs - F_img["x"])
        assert sp.simplify(residual - expected) == 0


def test_s2_4d_eta_sign_matches_sympy_expansion():
    # the printed 4d reflection flips eta together with s; the p2-residual
    # then equals eta exactly, and vanishes when eta is kept fixed
    q1, p1, q2, p2, s, a0, a1, a2, eta = sp.symbols("q1 p1 q2 p2 s a0 a1 a2 eta")

    def f_p2(Q2, P2, S, A1, A2, ETA):
        return (Q2 * P2**2) / S + (A1 + A2) * P2 / S + ETA / 2

    lhs = -(-f_p2(q2, p2, s, a1, a2, eta))
    for eta_sign, expected in ((-1, eta), (+1, sp.Integer(0))):
        rhs = f_p2(-q2, -p2, -s, a1 + 2 * a2, -a2, eta_sign * eta)
        assert sp.simplify(lhs - rhs - expected) == 0


def test_charts():
    assert check_chart("five_dim", "chart0").passed
    assert check_chart("five_dim", "chart1").passed
    assert check_chart("five_dim", "chart2", "corrected").passed
    report = check_chart("five_dim", "chart2", "printed")
    assert not report.passed
    assert "non-polynomial" in report.detail


def test_chart_fields_equal_transformed_family():
    # the field written in chart coordinates is not merely polynomial: it is
    # the same family at the parameters of the matching reflection (for the
    # outer chart, up to the sign flip that separates chart from reflection)
    from painleve_d32.ring import differentiate, substitute

    five = load_model("five_dim")
    T = five.table
    flow = five.flow()
    cases = [
        ("chart0", "s0_5d", {}),
        ("chart1", "s1_5d", {}),
        ("chart2", "s2_5d", {"x": -1, "y": +1, "z": -1, "w": -1, "q": -1}),
    ]
    for chart_id, smap_id, signs in cases:
        chart = load_map(chart_id, "resolved")
        smap = load_map(smap_id, "resolved")
        corrections = verify._chart_corrections(five, chart)
        inverse = {
            n: syms(T, n)[0] - corrections[n] for n in five.state
        }
        param_bind = smap.param_images(T)
        param_bind["eta"] = smap.eta_sign * syms(T, "eta")[0]
        if signs:
            param_bind.update(
                {n: signs[n] * syms(T, n)[0] for n in five.state}
            )
        for name in five.state:
            in_chart = substitute(differentiate(chart.var_map[name], flow), inverse)
            expected = substitute(five.rhs[name], param_bind)
            if signs:
                expected = signs[name] * expected
            assert in_chart.equals(expected, relation=True), (chart_id, name)


# -- integrals -------------------------------------------------------------------------------


def test_first_integrals():
    assert check_first_integral("five_dim", "ywq").passed
    assert check_first_integral("K1_sys", "I1").passed
    assert check_first_integral("tildeK2_sys", "I2").passed
    with pytest.raises(ValueError):
        check_first_integral("ham_4d", "I1")


def test_perturbed_integral_fails():
    five = load_model("five_dim")
    y, w, q = syms(five.table, "y w q")
    report = check_integral_expr("five_dim", y - 2 * w * q, Fraction(-1), "perturbed")
    assert not report.passed
    assert report.witness_point is not None


# -- Hamiltonian, reduction, second-order forms ------------------------------------------------


def test_hamiltonian_consistency():
    for sid in ("ham_4d", "K1_sys", "K2_sys", "tildeK2_sys"):
        assert check_hamiltonian_consistency(sid).passed
    with pytest.raises(ValueError):
        check_hamiltonian_consistency("five_dim")


def test_reduction():
    assert check_reduction_5d_to_4d().passed
    # dropping the exponential from the eliminated variable must break it
    entries = verify._reduction_entries(drop_exponential=True)
    assert any(
        not is_identically_zero(resid, relation=True) for _, resid in entries
    )


def test_second_order_forms():
    assert check_second_order_forms().passed


def test_second_order_fails_without_coupling():
    ham = load_model("ham_4d")
    T = ham.table
    H_uncoupled = ham.hamiltonian.expr + syms(T, "p1")[0] * syms(T, "p2")[0] / syms(T, "s")[0]
    rhs = {}
    for coord, mom in ham.hamiltonian.pairing:
        rhs[coord] = Derivation(T, {mom: 1}).of(H_uncoupled)
        rhs[mom] = -Derivation(T, {coord: 1}).of(H_uncoupled)
    perturbed = VectorFieldSystem(
        "ham_4d", T, rhs, relation=True,
        hamiltonian=Hamiltonian(H_uncoupled, ham.hamiltonian.pairing),
        singular_at_zero_indep=True,
    )
    entries = verify._second_order_entries(perturbed)
    assert any(
        not is_identically_zero(resid, relation=True)
        for label, resid in entries if label.startswith("coupled")
    )


# -- solutions and the invariant divisor ---------------------------------------------------------


def test_particular_solutions():
    for pid in ("linear_xz_sol", "second_order_sol_a", "second_order_sol_b",
                "rest_wq_zero"):
        assert check_particular_solution(pid).passed, pid


def test_invariant_divisor():
    report = check_invariant_divisor()
    assert report.passed
    assert "x*w + z*q - 1" in report.detail


# -- the search oracle ----------------------------------------------------------------------------


def test_search_recovers_ywq():
    found = first_integral_search("five_dim", 2, 0, (Fraction(-1),))
    assert len(found) == 1
    ywq = load_integral("ywq").expr
    assert found[0].expr.equals(ywq) or found[0].expr.equals(-ywq)


def test_search_recovers_I1():
    found = first_integral_search("K1_sys", 4, 0, (Fraction(0),))
    assert len(found) == 1
    i1 = load_integral("I1").expr
    assert found[0].expr.equals(i1) or found[0].expr.equals(-i1)


def test_search_ham_4d_empty():
    found = first_integral_search(
        "ham_4d", 3, 2, (Fraction(0), Fraction(-1), Fraction(1))
    )
    assert found == []


def test_search_cross_check_against_integral_checker():
    for integral in first_integral_search("five_dim", 2, 0, (Fraction(-1),)):
        assert check_integral_expr(
            "five_dim", integral.expr, integral.lam, "search-hit"
        ).passed


def test_search_guards():
    with pytest.raises(ValueError):
        first_integral_search("five_dim", 0, 0, (Fraction(0),))
    with pytest.raises(CapacityError):
        first_integral_search(
            "ham_4d", 6, 4, (Fraction(0),), monomial_cap=50
        )


def test_variant_policy_in_run_scope():
    reports = run_scope("symmetry", variant="printed")
    by_id = {r.check_id: r for r in reports}
    assert not by_id["symmetry:five_dim:s2_5d:printed"].passed
    assert not by_id["symmetry:ham_4d:s2_4d:printed"].passed
    reports = run_scope("symmetry", variant="corrected")
    assert all(r.passed for r in reports)
    reports = run_scope("symmetry", variant="both")
    assert sum(not r.passed for r in reports) == 2
