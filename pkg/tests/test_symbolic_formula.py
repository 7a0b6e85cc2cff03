import math

import pytest

from gwpkan.symbolic import (
    GWP_SYMBOLS, MissingSymbolError, eval_expr, parse_expr, print_expr,
    reference_gwp, reference_gwp_expr,
)


def bindings(**overrides):
    b = {s: 0.0 for s in GWP_SYMBOLS}
    b.update(overrides)
    return b


class TestReferenceFormula:
    def test_all_zero_exact(self):
        assert reference_gwp(bindings()) == -0.094409

    def test_carbon_count_term(self):
        # independent scalar oracle: 112143/1e6 - 94409/1e6
        expected = 112143 / 1_000_000 - 94409 / 1_000_000
        assert expected == 0.017734
        assert abs(reference_gwp(bindings(nC=1.0)) - 0.017734) <= 1e-12

    def test_atom_count_exponent_term(self):
        # nAtom = 240 makes the exponent exactly 1
        expected = -0.094409 * math.e
        assert abs(reference_gwp(bindings(nAtom=240.0)) - expected) <= 1e-12

    def test_monotone_in_carbon_count(self):
        values = [reference_gwp(bindings(nC=float(n))) for n in range(51)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_missing_symbol_named(self):
        incomplete = bindings()
        del incomplete["VE3_A"]
        with pytest.raises(MissingSymbolError, match="VE3_A"):
            reference_gwp(incomplete)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="nAtom"):
            reference_gwp(bindings(nAtom=float("nan")))

    def test_printed_form_reparses_and_matches(self):
        expr = reference_gwp_expr()
        reparsed = parse_expr(print_expr(expr))
        for point in (bindings(), bindings(nC=1.0), bindings(nAtom=240.0)):
            a = eval_expr(expr, point)
            b = eval_expr(reparsed, point)
            assert abs(a - b) <= 1e-12

    def test_uses_generic_evaluator(self):
        # the reference value must come from the shared AST, not a separate
        # arithmetic path: evaluating the expression directly agrees exactly
        expr = reference_gwp_expr()
        point = bindings(SpMax_A=2.2, nAromAtom=6, nAromBond=6, nC=4,
                         ATS5dv=12.5, ATS6dv=8.0, SpAD_A=5.5, SpAbs_A=6.5,
                         VE3_A=-0.7, nAtom=19, nBase=1)
        assert reference_gwp(point) == eval_expr(expr, point)

    def test_eleven_symbols(self):
        assert len(GWP_SYMBOLS) == 11
        from gwpkan.symbolic import free_variables
        assert free_variables(reference_gwp_expr()) == set(GWP_SYMBOLS)
