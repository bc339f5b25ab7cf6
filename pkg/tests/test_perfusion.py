import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from thermoperfusion import (
    FaceMask,
    ModelParameters,
    ThermalFrame,
    celsius_to_kelvin,
    conductive_flux,
    convective_flux,
    flux_breakdown,
    perfuse_frame,
    perfusion_at_pixel,
    radiative_flux,
)
from thermoperfusion.errors import DomainError, InvalidInputError, SingularityError

P_FULL = ModelParameters(variant="full")
P_TABLE = ModelParameters(variant="table")


def oracle_fluxes(t_s_c: str, params=P_FULL):
    """High-precision independent evaluation of the closed-form fluxes."""
    mp.dps = 40
    ts = mpf(t_s_c) + mpf("273.15")
    te, ta = mpf(repr(params.T_e)), mpf(repr(params.T_a))
    h_r = mpf("0.98") * mpf("5.67e-8") * (ts ** 4 - te ** 4)
    coeff = (mpf("0.27") * mpf("0.024") * mpf("0.170") ** mpf("-0.25")
             * (mpf("0.72") * mpf("9.8") * mpf("3.354e-3") / mpf("1.56e-5") ** 2)
             ** mpf("0.25"))
    h_f = coeff * (ts - te) ** mpf("1.25")
    h_c = mpf("0.5") * (ta - ts) / mpf("0.085")
    return float(h_r), float(h_f), float(h_c)


class TestRadiativeFlux:
    def test_zero_at_ambient(self):
        assert radiative_flux(P_FULL.T_e, P_FULL) == 0.0

    @pytest.mark.parametrize("t_c, expected", [("34.46", 64.31), ("34.83", 66.69)])
    def test_against_oracle(self, t_c, expected):
        h_r, _, _ = oracle_fluxes(t_c)
        got = radiative_flux(celsius_to_kelvin(float(t_c)), P_FULL)
        assert got == pytest.approx(h_r, rel=1e-12)
        assert got == pytest.approx(expected, abs=0.05)

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            radiative_flux(float("nan"), P_FULL)


class TestConvectiveFlux:
    def test_zero_at_ambient(self):
        assert convective_flux(P_FULL.T_e, P_FULL) == 0.0

    @pytest.mark.parametrize("t_c, expected", [("34.46", 18.85), ("35.73", 21.75)])
    def test_against_oracle(self, t_c, expected):
        _, h_f, _ = oracle_fluxes(t_c)
        got = convective_flux(celsius_to_kelvin(float(t_c)), P_FULL)
        assert got == pytest.approx(h_f, rel=1e-12)
        assert got == pytest.approx(expected, abs=0.05)

    def test_below_ambient_is_domain_error(self):
        with pytest.raises(DomainError):
            convective_flux(P_FULL.T_e - 1.0, P_FULL)


class TestConductiveFlux:
    def test_zero_at_core(self):
        assert conductive_flux(P_FULL.T_c, P_FULL) == 0.0

    @pytest.mark.parametrize("t_c, expected", [("34.46", 26.71), ("35.73", 19.24)])
    def test_against_oracle(self, t_c, expected):
        _, _, h_c = oracle_fluxes(t_c)
        got = conductive_flux(celsius_to_kelvin(float(t_c)), P_FULL)
        assert got == pytest.approx(h_c, rel=1e-12)
        assert got == pytest.approx(expected, abs=0.02)


class TestPerfusionAtPixel:
    def test_table_variant_reproduces_published_nose_value(self):
        omega = perfusion_at_pixel(celsius_to_kelvin(34.46), P_TABLE)
        assert omega == pytest.approx(6.05e-2, rel=0.02)
        h_r, h_f, _ = oracle_fluxes("34.46")
        expected = (h_r + h_f) / (0.8 * 3780.0 * (312.15 - 307.61)) * 10
        assert omega == pytest.approx(expected, rel=1e-9)

    def test_table_variant_reproduces_published_forehead_value(self):
        omega = perfusion_at_pixel(celsius_to_kelvin(34.83), P_TABLE)
        assert omega == pytest.approx(6.85e-2, rel=0.02)

    def test_full_variant(self):
        omega = perfusion_at_pixel(celsius_to_kelvin(34.46), P_FULL)
        assert omega == pytest.approx(3.81e-3, rel=0.02)

    def test_singularity_at_arterial_temperature(self):
        with pytest.raises(SingularityError):
            perfusion_at_pixel(P_FULL.T_a, P_FULL)

    @given(st.floats(min_value=297.65, max_value=312.05))
    @settings(max_examples=200)
    def test_energy_balance_residual(self, t_s):
        omega = perfusion_at_pixel(t_s, P_FULL)
        h_r = radiative_flux(t_s, P_FULL)
        h_f = convective_flux(t_s, P_FULL)
        h_c = conductive_flux(t_s, P_FULL)
        h_b = omega * P_FULL.alpha * P_FULL.c_b * (P_FULL.T_a - t_s)
        residual = h_r + h_f - P_FULL.Q_m - h_c - h_b
        assert abs(residual) < 1e-9 * max(1.0, abs(h_r))

    @pytest.mark.parametrize("params", [P_FULL, P_TABLE])
    def test_monotone_in_skin_temperature(self, params):
        ts = np.linspace(297.65, 312.05, 500)
        omega = np.array([perfusion_at_pixel(t, params) for t in ts])
        assert np.all(np.diff(omega) > 0)

    def test_scale_equivariance(self):
        base = ModelParameters(variant="table", output_scale=1.0)
        scaled = ModelParameters(variant="table", output_scale=7.0)
        t = celsius_to_kelvin(34.0)
        assert perfusion_at_pixel(t, scaled) == pytest.approx(
            7.0 * perfusion_at_pixel(t, base), rel=1e-15)


class TestFluxBreakdown:
    def test_balance_closes(self):
        fb = flux_breakdown(celsius_to_kelvin(34.46), P_FULL)
        assert fb.H_e == 0.0
        assert fb.H_r + fb.H_f + fb.H_e == pytest.approx(
            fb.H_m + fb.H_c + fb.H_b, rel=1e-12)


class TestPerfuseFrame:
    def test_uniform_ambient_frame_is_zero(self):
        frame = ThermalFrame(data=np.full((4, 4), 24.0))
        mask = FaceMask(bits=np.ones((4, 4), dtype=bool))
        pframe, issues = perfuse_frame(frame, mask, P_TABLE)
        assert not issues
        assert np.all(pframe.data == 0.0)

    def test_all_false_mask_gives_zero_frame(self):
        frame = ThermalFrame(data=np.full((4, 4), 34.0))
        mask = FaceMask(bits=np.zeros((4, 4), dtype=bool))
        pframe, issues = perfuse_frame(frame, mask, P_TABLE)
        assert not issues
        assert np.all(pframe.data == 0.0)

    @pytest.mark.parametrize("params", [P_FULL, P_TABLE])
    def test_matches_scalar_evaluation(self, params):
        rng = np.random.default_rng(7)
        data = rng.uniform(30.0, 36.0, size=(3, 3))
        frame = ThermalFrame(data=data)
        mask = FaceMask(bits=np.ones((3, 3), dtype=bool))
        pframe, issues = perfuse_frame(frame, mask, params)
        assert not issues
        for r in range(3):
            for c in range(3):
                expected = perfusion_at_pixel(celsius_to_kelvin(data[r, c]), params)
                assert pframe.data[r, c] == pytest.approx(expected, rel=1e-12)

    def test_masked_out_pixels_are_zero(self):
        data = np.full((2, 2), 34.0)
        frame = ThermalFrame(data=data)
        bits = np.array([[True, False], [False, True]])
        pframe, _ = perfuse_frame(frame, FaceMask(bits=bits), P_TABLE)
        assert pframe.data[0, 1] == 0.0 and pframe.data[1, 0] == 0.0
        assert pframe.data[0, 0] > 0.0

    def test_flags_below_ambient_pixels(self):
        data = np.full((2, 2), 34.0)
        data[0, 0] = 20.0  # below the 24 degC ambient
        frame = ThermalFrame(data=data)
        mask = FaceMask(bits=np.ones((2, 2), dtype=bool))
        pframe, issues = perfuse_frame(frame, mask, P_TABLE)
        assert [(i.row, i.col, i.kind) for i in issues] == [(0, 0, "below_ambient")]
        assert pframe.data[0, 0] == 0.0

    def test_fails_when_over_one_percent_singular(self):
        data = np.full((10, 10), 34.0)
        data[0, :2] = 39.0  # exactly arterial temperature, 2% of pixels
        frame = ThermalFrame(data=data)
        mask = FaceMask(bits=np.ones((10, 10), dtype=bool))
        with pytest.raises(SingularityError):
            perfuse_frame(frame, mask, P_TABLE)

    def test_tolerates_one_percent_singular(self):
        data = np.full((10, 10), 34.0)
        data[0, 0] = 39.0
        frame = ThermalFrame(data=data)
        mask = FaceMask(bits=np.ones((10, 10), dtype=bool))
        pframe, issues = perfuse_frame(frame, mask, P_TABLE)
        assert [(i.row, i.col, i.kind) for i in issues] == [(0, 0, "singular")]
        assert pframe.data[0, 0] == 0.0
