import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermoperfusion import (
    ModelParameters,
    ModelVariant,
    RoiRect,
    RoiSet,
    RoiName,
    ThermalFrame,
    celsius_to_kelvin,
    kelvin_to_celsius,
)
from thermoperfusion.errors import InvalidInputError, ParameterError


class TestCelsiusKelvin:
    def test_zero_celsius(self):
        assert celsius_to_kelvin(0.0) == 273.15

    def test_room_temperature(self):
        assert celsius_to_kelvin(24.0) == 297.15

    def test_skin_temperature(self):
        assert celsius_to_kelvin(34.46) == pytest.approx(307.61, abs=1e-12)

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            celsius_to_kelvin(float("nan"))

    def test_array_input(self):
        out = celsius_to_kelvin(np.array([0.0, 24.0]))
        np.testing.assert_allclose(out, [273.15, 297.15])

    @given(st.floats(min_value=-40.0, max_value=120.0))
    def test_round_trip_within_one_ulp(self, t):
        back = kelvin_to_celsius(celsius_to_kelvin(t))
        assert abs(back - t) <= math.ulp(max(abs(t), 273.15))


class TestModelParameters:
    def test_defaults_match_published_constants(self):
        p = ModelParameters()
        assert p.rho_b == 1060.0
        assert p.c_b == 3.78e3
        assert p.T_a == 312.15
        assert p.T_c == 312.15
        assert p.k_s == 0.5
        assert p.k_f == 0.024
        assert p.Q_m == 4.186
        assert p.sigma == 5.67e-8
        assert p.epsilon == 0.98
        assert p.alpha == 0.8
        assert p.Pr == 0.72
        assert p.nu == 1.56e-5
        assert p.beta == 3.354e-3
        assert p.g == 9.8
        assert p.A == 0.27
        assert p.M == 0.25
        assert p.d == 0.170
        assert p.D == 0.085
        assert p.T_e == 297.15

    def test_scale_defaults_per_variant(self):
        assert ModelParameters(variant="full").output_scale == 1.0
        assert ModelParameters(variant="table").output_scale == 10.0
        assert ModelParameters(variant="table", output_scale=3.0).output_scale == 3.0

    def test_serialization_round_trip_bit_exact(self):
        p = ModelParameters(variant=ModelVariant.TABLE_CONSISTENT)
        q = ModelParameters.from_dict(p.to_dict())
        assert p == q

    def test_rejects_ambient_above_arterial(self):
        with pytest.raises(ParameterError):
            ModelParameters(T_e=320.0)

    @pytest.mark.parametrize("kwargs", [
        {"epsilon": 0.0}, {"epsilon": 1.5}, {"alpha": 0.0},
        {"M": 1.0}, {"c_b": -1.0}, {"output_scale": 0.0},
    ])
    def test_rejects_out_of_range_constants(self, kwargs):
        with pytest.raises(ParameterError):
            ModelParameters(**kwargs)


class TestThermalFrame:
    def test_dimensions(self):
        f = ThermalFrame(data=np.full((3, 4), 30.0))
        assert (f.height, f.width) == (3, 4)

    def test_rejects_out_of_window_values(self):
        with pytest.raises(InvalidInputError):
            ThermalFrame(data=np.full((2, 2), 150.0))
        with pytest.raises(InvalidInputError):
            ThermalFrame(data=np.full((2, 2), -50.0))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            ThermalFrame(data=np.array([[30.0, np.nan]]))

    def test_data_is_immutable(self):
        f = ThermalFrame(data=np.full((2, 2), 30.0))
        with pytest.raises(ValueError):
            f.data[0, 0] = 31.0


class TestRoiSet:
    def test_rect_bounds_validation(self):
        r = RoiRect(name=RoiName.NOSE, row=90, col=90, rows=10, cols=10)
        with pytest.raises(ParameterError):
            r.validate_against(95, 120)
        r.validate_against(100, 100)

    def test_total_face_has_no_rect(self):
        with pytest.raises(ParameterError):
            RoiRect(name=RoiName.TOTAL_FACE, row=0, col=0, rows=1, cols=1)

    def test_duplicate_names_rejected(self):
        r = RoiRect(name=RoiName.NOSE, row=0, col=0, rows=10, cols=10)
        with pytest.raises(ParameterError):
            RoiSet(rects=(r, r))

    def test_names_include_total_face(self):
        r = RoiRect(name=RoiName.NOSE, row=0, col=0, rows=10, cols=10)
        assert RoiSet(rects=(r,)).names() == [RoiName.NOSE, RoiName.TOTAL_FACE]
