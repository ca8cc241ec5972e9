import json
from fractions import Fraction as Q

import pytest

from hypersym.exactnum import DegenerateParameter, factorial, pochhammer
from hypersym.hypfun import Params1F1, ParamsPsi2, f11_coeff, f11_series, psi2_series
from hypersym.identities import (
    AS_STATED,
    CORRECTED,
    CapUnderflow,
    DomainViolation,
    IdentityRecord,
    SuiteFailure,
    catalogue,
    default_param_points,
    get_record,
    report_to_json,
    report_to_markdown,
    run_suite,
    strip_timing,
    verify_formal,
    verify_numeric,
)

P = ParamsPsi2(Q(1, 2), Q(4, 3), Q(5, 7))
P_ALL = default_param_points()

EXPECT_AS_STATED_VERIFIED = (
    "I-F11-RAISE-A",
    "I-F11-SHIFT",
    "I-PSI2-REDUCTION",
    "I-PSI2-LOWER-B",
    "I-PSI2-LOWER-C",
    "I-PSI2-SHIFT-X",
    "I-PSI2-SHIFT-Y",
)
EXPECT_AS_STATED_MISMATCH = ("I-F11-RAISE-B", "I-F11-LOWER-A", "I-F11-LOWER-B")


class TestCatalogue:
    def test_ten_records(self):
        cat = catalogue()
        assert len(cat) == 10
        assert [r.rec_id for r in cat] == [
            "I-F11-RAISE-A", "I-F11-RAISE-B", "I-F11-LOWER-A", "I-F11-LOWER-B",
            "I-F11-SHIFT", "I-PSI2-REDUCTION", "I-PSI2-LOWER-B",
            "I-PSI2-LOWER-C", "I-PSI2-SHIFT-X", "I-PSI2-SHIFT-Y",
        ]

    def test_corrected_candidates_present_where_needed(self):
        with_corr = {r.rec_id for r in catalogue() if r.has_correction()}
        assert with_corr == set(EXPECT_AS_STATED_MISMATCH)

    def test_unknown_record(self):
        with pytest.raises(KeyError):
            get_record("I-NOPE")

    def test_chi0_consistency_every_record_and_variant(self):
        # at deformation order zero both sides are the undeformed function
        for rec in catalogue():
            for variant in rec.variants:
                row = verify_formal(rec.rec_id, variant, P, 0, 6)
                assert row["status"] == "verified", (rec.rec_id, variant, row)

    def test_shift_record_at_x_cap_zero_is_base_series(self):
        # the x-degree-0 column of the shifted family member is the series
        # in chi itself
        rec = get_record("I-F11-SHIFT")
        p1 = Params1F1(P.a, P.b)
        lhs = rec.variant(AS_STATED).lhs_builder(p1, {"x": 0, "chi": 6})
        base = f11_series(p1, 6, var="chi").extend({"x": 0})
        assert lhs == base


class TestVerifyFormal:
    @pytest.mark.parametrize("rec_id", EXPECT_AS_STATED_VERIFIED)
    @pytest.mark.parametrize("point", P_ALL, ids=lambda p: f"a={p.a}")
    def test_as_stated_verified(self, rec_id, point):
        fam = get_record(rec_id).family
        n, m = (4, 8) if fam == "f11" else (3, 4)
        row = verify_formal(rec_id, AS_STATED, point, n, m)
        assert row["status"] == "verified", row

    @pytest.mark.parametrize("rec_id", EXPECT_AS_STATED_MISMATCH)
    @pytest.mark.parametrize("point", P_ALL, ids=lambda p: f"a={p.a}")
    def test_as_stated_mismatch_with_verified_correction(self, rec_id, point):
        row = verify_formal(rec_id, AS_STATED, point, 2, 6)
        assert row["status"] == "mismatch"
        assert row["witness"] is not None
        fixed = verify_formal(rec_id, CORRECTED, point, 4, 8)
        assert fixed["status"] == "verified", fixed

    def test_raise_a_spec_orders(self):
        row = verify_formal("I-F11-RAISE-A", AS_STATED, P, 6, 12)
        assert row["status"] == "verified"

    def test_psi2_shift_x_spec_orders(self):
        row = verify_formal("I-PSI2-SHIFT-X", AS_STATED, P, 4, 6)
        assert row["status"] == "verified"

    def test_lower_b_witness_structure(self):
        # first failure at the chi^1 constant column: the stated exponent
        # overshoots by one, so lhs - rhs at chi^1 equals the base series
        row = verify_formal("I-F11-LOWER-B", AS_STATED, P, 2, 8)
        assert row["status"] == "mismatch"
        assert row["witness"]["monomial"] == "chi^1*x^0"
        assert Q(row["witness"]["lhs"]) == P.b
        assert Q(row["witness"]["rhs"]) == P.b - 1

    def test_lower_b_residual_slice_is_base_series(self):
        rec = get_record("I-F11-LOWER-B")
        p1 = Params1F1(P.a, P.b)
        caps = {"x": 8, "chi": 2}
        var = rec.variant(AS_STATED)
        diff = var.lhs_builder(p1, caps) - var.rhs_builder(p1, caps)
        for k in range(8):
            assert diff.coefficient({"chi": 1, "x": k}) == f11_coeff(p1, k)

    def test_witness_reproducible(self):
        r1 = verify_formal("I-F11-RAISE-B", AS_STATED, P, 3, 6)
        r2 = verify_formal("I-F11-RAISE-B", AS_STATED, P, 3, 6)
        assert r1["witness"] == r2["witness"]

    def test_order_monotonicity(self):
        for n in range(0, 5):
            for m in (2, 5, 8):
                row = verify_formal("I-F11-RAISE-A", AS_STATED, P, n, m)
                assert row["status"] == "verified"

    def test_degenerate_shift_rejected(self):
        # b = 2 hits b - l = 0 at l = 2 on the lowering side
        bad = ParamsPsi2(Q(1, 2), 2, Q(5, 7))
        with pytest.raises(DegenerateParameter):
            verify_formal("I-F11-LOWER-B", AS_STATED, bad, 4, 6)

    def test_negative_orders_rejected(self):
        with pytest.raises(CapUnderflow):
            verify_formal("I-F11-RAISE-A", AS_STATED, P, -1, 6)


class TestTaylorOracle:
    """Shift identities re-derived through iterated series derivatives."""

    def test_f11_shift_coefficients(self):
        p1 = Params1F1(P.a, P.b)
        order = 12
        base = f11_series(p1, order)
        deriv = base
        for l in range(5):
            # chi^l coefficient of the right side at inner order (order - l)
            rhs = f11_series(p1.shifted(l, l), order).scale(
                pochhammer(p1.a, l) / (factorial(l) * pochhammer(p1.b, l))
            )
            assert deriv.scale(Q(1, factorial(l))) == rhs.truncate(deriv.cap_map())
            deriv = deriv.derivative("x")

    def test_psi2_shift_x_coefficients(self):
        order = 6
        base = psi2_series(P, order, order)
        deriv = base
        for l in range(4):
            rhs = psi2_series(P.shifted(l, l, 0), order, order).scale(
                pochhammer(P.a, l) / (factorial(l) * pochhammer(P.b, l))
            )
            assert deriv.scale(Q(1, factorial(l))) == rhs.truncate(deriv.cap_map())
            deriv = deriv.derivative("x")

    def test_psi2_shift_y_coefficients(self):
        order = 6
        base = psi2_series(P, order, order)
        deriv = base
        for l in range(4):
            rhs = psi2_series(P.shifted(l, 0, l), order, order).scale(
                pochhammer(P.a, l) / (factorial(l) * pochhammer(P.c, l))
            )
            assert deriv.scale(Q(1, factorial(l))) == rhs.truncate(deriv.cap_map())
            deriv = deriv.derivative("y")


class TestVerifyNumeric:
    def test_raise_a_spec_point(self):
        row = verify_numeric("I-F11-RAISE-A", AS_STATED, P, 0.3, 1e-10, x=0.25)
        assert row["status"] == "verified"

    def test_chi_zero_trivial(self):
        row = verify_numeric("I-PSI2-SHIFT-X", AS_STATED, P, 0.0, 1e-12)
        assert row["status"] == "verified"

    def test_domain_gate(self):
        with pytest.raises(DomainViolation):
            verify_numeric("I-F11-RAISE-A", AS_STATED, P, 1.5, 1e-8)

    @pytest.mark.parametrize("chi", [0.1, 0.25])
    @pytest.mark.parametrize("rec_id", EXPECT_AS_STATED_VERIFIED)
    def test_formal_implies_numeric(self, rec_id, chi):
        row = verify_numeric(rec_id, AS_STATED, P, chi, 1e-8)
        assert row["status"] == "verified", row

    @pytest.mark.parametrize("rec_id", EXPECT_AS_STATED_MISMATCH)
    def test_mismatches_fail_numerically_too(self, rec_id):
        row = verify_numeric(rec_id, AS_STATED, P, 0.25, 1e-8)
        assert row["status"] == "mismatch"
        fixed = verify_numeric(rec_id, CORRECTED, P, 0.25, 1e-8)
        assert fixed["status"] == "verified"


class TestRunSuite:
    def test_default_formal_suite(self):
        report = run_suite(mode="formal")
        assert report.summary["records"] == 10
        assert report.summary["rows"] == 39  # 30 as-stated + 9 corrected
        assert report.summary["as_stated_verified"] == 21
        assert report.summary["as_stated_mismatched"] == 9
        assert report.summary["unresolved_failures"] == 0
        assert report.invariant_ok()

    def test_numeric_rows_per_record_and_chi(self):
        report = run_suite(mode="numeric", chi_grid=(0.1, 0.25, 0.5),
                           param_points=[P])
        # 13 record-variants x 1 point x 3 chi values
        assert report.summary["rows"] == 13 * 3
        assert report.invariant_ok()

    def test_empty_catalogue_hook(self):
        report = run_suite(records=[])
        assert report.rows == []
        assert report.summary["rows"] == 0
        assert report.summary["unresolved_failures"] == 0

    def test_empty_points_rejected(self):
        with pytest.raises(ValueError):
            run_suite(param_points=[])

    def test_unpaired_mismatch_fails_suite(self):
        broken = get_record("I-F11-LOWER-B")
        stripped = IdentityRecord(
            rec_id=broken.rec_id,
            family=broken.family,
            statement=broken.statement,
            validity=broken.validity,
            domain_ok=broken.domain_ok,
            variants={AS_STATED: broken.variant(AS_STATED)},
        )
        with pytest.raises(SuiteFailure) as exc:
            run_suite(records=[stripped], param_points=[P])
        assert exc.value.report.summary["unresolved_failures"] == 1

    def test_deterministic_rows(self):
        r1 = run_suite(mode="formal", param_points=[P])
        r2 = run_suite(mode="formal", param_points=[P])
        strip = lambda rows: [
            {k: v for k, v in row.items() if k != "elapsed_ms"} for row in rows
        ]
        assert strip(r1.rows) == strip(r2.rows)


class TestReportSerialization:
    def test_json_schema_fields(self):
        report = run_suite(mode="formal", param_points=[P])
        payload = json.loads(report_to_json(report))
        assert payload["scope"] == "identities"
        assert payload["engine_version"]
        row = payload["rows"][0]
        for key in ("id", "variant", "params", "orders", "status", "witness", "elapsed_ms"):
            assert key in row

    def test_strip_timing_makes_bytes_stable(self):
        r1 = run_suite(mode="formal", param_points=[P])
        r2 = run_suite(mode="formal", param_points=[P])
        assert strip_timing(report_to_json(r1)) == strip_timing(report_to_json(r2))

    def test_markdown_contains_rows(self):
        report = run_suite(mode="formal", param_points=[P])
        md = report_to_markdown(report)
        assert "I-F11-RAISE-A" in md
        assert "| verified |" in md or "verified" in md
        assert "unresolved_failures=0" in md
