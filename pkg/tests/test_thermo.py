from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minispec import thermo
from minispec.errors import DomainError, InvalidRange, OutOfRange
from minispec.thermo import (
    ThermistorParams, adc_code, build_table, code_real, divider_voltage, pwl_code,
    resistance, temp_from_code, to_csv, to_mc,
)
from oracles import mp_code, mp_code_real, mp_resistance, mp_voltage

# Max |pwl_code(T) - (250 U(T) + 0.5)| over T in [-40, 125] at 0.01 degC steps,
# computed once with the 50-digit oracle (0.98638262298662...) and rounded up.
PWL_GOLDEN_BOUND = 0.986382623

# Independent 50-digit evaluations, frozen.
R_AT_0 = 34015.086997295571771
U_AT_25 = 50000 / 15360
D_AT_25 = 814


def test_resistance_at_reference_temperature():
    assert resistance(25) == pytest.approx(10000.0, rel=1e-9)


def test_resistance_at_zero_matches_high_precision():
    assert resistance(0) == pytest.approx(R_AT_0, rel=1e-9)
    assert resistance(0) == pytest.approx(float(mp_resistance(0)), rel=1e-12)


def test_divider_voltage_at_reference():
    assert divider_voltage(25) == pytest.approx(U_AT_25, rel=1e-12)


def test_code_at_reference():
    assert adc_code(25) == D_AT_25


def test_resistance_rejects_absolute_zero():
    with pytest.raises(DomainError):
        resistance(-273.15)


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        ThermistorParams(beta=0.0)


def test_exact_codes_agree_with_oracle_everywhere():
    for t in range(-40, 126):
        assert adc_code(t) == mp_code(t), t


def test_voltage_strictly_decreasing_on_fine_sweep():
    temps = [-40 + k / 10 for k in range(1651)]
    volts = [divider_voltage(t) for t in temps]
    assert all(a > b for a, b in zip(volts, volts[1:]))
    assert all(0 < v < 5 for v in volts)


def test_codes_bounded_and_non_increasing():
    codes = [adc_code(t) for t in range(-40, 126)]
    assert all(0 <= c <= 1250 for c in codes)
    assert all(a >= b for a, b in zip(codes, codes[1:]))


def test_default_table_shape():
    table = build_table()
    assert len(table) == 100
    temps = table.temperatures
    assert temps[0] == -40 and temps[-1] == 125
    assert all(a < b for a, b in zip(temps, temps[1:]))
    assert all(c == adc_code(t) for t, c in table.entries)
    assert all(a >= b for a, b in zip(table.codes, table.codes[1:]))


def test_table_spacing_rounds_toward_t_min():
    table = build_table(0, 10, 4)
    assert table.temperatures == (0, 3, 6, 10)


@pytest.mark.parametrize("args", [(10, 10, 5), (0, 10, 1), (0, 5, 10)])
def test_table_rejects_bad_ranges(args):
    with pytest.raises(InvalidRange):
        build_table(*args)


def test_pwl_is_exact_at_samples():
    table = build_table()
    for t, c in table.entries:
        assert pwl_code(t, table) == c


def test_pwl_outside_table_is_rejected():
    with pytest.raises(OutOfRange):
        pwl_code(-41, build_table())


def test_pwl_error_within_golden_bound():
    table = build_table()
    worst = max(abs(pwl_code(-40 + k / 100, table) - code_real(-40 + k / 100))
                for k in range(16501))
    assert worst <= PWL_GOLDEN_BOUND
    # the bound is tight: the sweep reaches it to within float noise
    assert worst > PWL_GOLDEN_BOUND - 1e-6


def test_round_trip_for_every_integer_temperature():
    table = build_table()
    for t in range(-40, 125):
        assert adc_code(t) > adc_code(t + 1)
        assert temp_from_code(adc_code(t), table) == t


def test_inversion_satisfies_chained_ensures():
    table = build_table()
    for d in range(adc_code(125), adc_code(-40) + 1):
        t = temp_from_code(d, table)
        assert adc_code(t) >= d
        if t < 125:
            assert d > adc_code(t + 1)


def test_inversion_rejects_codes_outside_table():
    with pytest.raises(OutOfRange):
        temp_from_code(adc_code(-40) + 1, build_table())


def test_csv_and_snippet():
    table = build_table()
    csv = to_csv(table).splitlines()
    assert csv[0] == "temperature,code" and len(csv) == 101
    assert csv[1] == f"-40,{adc_code(-40)}"
    snippet = to_mc(table)
    assert "gTableTemp[100]" in snippet and "gTableCode[100]" in snippet


def test_snippet_is_valid_source():
    from minispec.frontend import parse_source, resolve
    tp = resolve(parse_source("module t;\n" + to_mc(build_table()), "t.mc"))
    assert tp.ghost("gTableCode") is not None


@settings(max_examples=300, deadline=None)
@given(st.floats(-40, 125, allow_nan=False))
def test_real_code_matches_oracle(t):
    assert code_real(t) == pytest.approx(float(mp_code_real(t)), rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(-40, 125, allow_nan=False))
def test_voltage_between_rails(t):
    assert 0 < divider_voltage(t) < 5
    assert divider_voltage(t) == pytest.approx(float(mp_voltage(t)), rel=1e-12)


def test_corpus_table_matches_library():
    from minispec.corpus import load_corpus
    tp = load_corpus()[0]
    codes = tp.const_values["TABLE_CODE"]
    t_min = tp.const_values["TABLE_T_MIN"]
    assert list(codes) == [adc_code(t_min + i) for i in range(len(codes))]
    assert thermo.DEFAULT.t0_kelvin == 298.15
