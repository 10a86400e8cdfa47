"""NTC thermistor model behind the temperature acquisition contracts.

R(T) = r0 * exp(beta * (1/(T + 273.15) - 1/(t0 + 273.15)))
U(T) = v_supply * R(T) / (R(T) + r_series)
D(T) = floor(counts_per_volt * U(T) + 0.5)

The operation order matches the ``R``/``U``/``D`` logic functions in
``corpus/acq.mc`` so that contract evaluation and this module agree bit for bit.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterator, Tuple

from minispec.errors import DomainError, InvalidRange, OutOfRange

ABS_ZERO = -273.15


@dataclass(frozen=True)
class ThermistorParams:
    r0: float = 10000.0
    beta: float = 3988.0
    t0: float = 25.0
    r_series: float = 5360.0
    v_supply: float = 5.0
    counts_per_volt: float = 250.0

    def __post_init__(self):
        for name in ("r0", "beta", "t0", "r_series", "v_supply", "counts_per_volt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def t0_kelvin(self) -> float:
        # 25.0 + 273.15 is one ulp away from the literal 298.15 used in the corpus
        return 298.15 if self.t0 == 25.0 else self.t0 + 273.15


DEFAULT = ThermistorParams()


def _check(T) -> None:
    if not T > ABS_ZERO:
        raise DomainError(f"temperature {T} is not above absolute zero")


def resistance(T, p: ThermistorParams = DEFAULT) -> float:
    _check(T)
    return p.r0 * math.exp(p.beta * (1.0 / (T + 273.15) - 1.0 / p.t0_kelvin))


def divider_voltage(T, p: ThermistorParams = DEFAULT) -> float:
    r = resistance(T, p)
    return (p.v_supply * r) / (r + p.r_series)


def adc_code(T, p: ThermistorParams = DEFAULT) -> int:
    return math.floor(p.counts_per_volt * divider_voltage(T, p) + 0.5)


def code_real(T, p: ThermistorParams = DEFAULT) -> float:
    """The unrounded code ``counts_per_volt * U(T) + 0.5``."""
    return p.counts_per_volt * divider_voltage(T, p) + 0.5


@dataclass(frozen=True)
class LookupTable:
    t_min: int
    t_max: int
    entries: Tuple[Tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self.entries)

    @property
    def temperatures(self) -> Tuple[int, ...]:
        return tuple(t for t, _ in self.entries)

    @property
    def codes(self) -> Tuple[int, ...]:
        return tuple(c for _, c in self.entries)


def build_table(t_min: int = -40, t_max: int = 125, n: int = 100,
                p: ThermistorParams = DEFAULT) -> LookupTable:
    """``n`` integer temperatures spread evenly over [t_min, t_max].

    Fractional spacing is floored, i.e. rounded toward ``t_min``.
    """
    if n < 2 or t_min >= t_max:
        raise InvalidRange(f"need t_min < t_max and n >= 2, got [{t_min}, {t_max}], n={n}")
    if t_max - t_min < n - 1:
        raise InvalidRange(f"{n} distinct integer temperatures do not fit in [{t_min}, {t_max}]")
    _check(t_min)
    temps = [t_min + (i * (t_max - t_min)) // (n - 1) for i in range(n)]
    return LookupTable(t_min, t_max, tuple((t, adc_code(t, p)) for t in temps))


def pwl_code(T: float, table: LookupTable) -> float:
    """Piecewise-linear code between the table's sample points."""
    if not table.t_min <= T <= table.t_max:
        raise OutOfRange(f"{T} outside [{table.t_min}, {table.t_max}]")
    temps = table.temperatures
    i = bisect.bisect_right(temps, T) - 1
    if i >= len(temps) - 1:
        return float(table.entries[-1][1])
    (t0, c0), (t1, c1) = table.entries[i], table.entries[i + 1]
    if T == t0:
        return float(c0)
    return c0 + (c1 - c0) * (T - t0) / (t1 - t0)


def temp_from_code(d: int, table: LookupTable, p: ThermistorParams = DEFAULT) -> int:
    """Largest integer t in the table range with ``adc_code(t) >= d``."""
    lo, hi = table.t_min, table.t_max
    if not adc_code(hi, p) <= d <= adc_code(lo, p):
        raise OutOfRange(f"code {d} outside [{adc_code(hi, p)}, {adc_code(lo, p)}]")
    # adc_code is non-increasing, so "adc_code(t) >= d" holds on a prefix of the range
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if adc_code(mid, p) >= d:
            lo = mid
        else:
            hi = mid - 1
    return lo


def to_csv(table: LookupTable) -> str:
    lines = ["temperature,code"]
    lines.extend(f"{t},{c}" for t, c in table.entries)
    return "\n".join(lines) + "\n"


def to_mc(table: LookupTable, prefix: str = "gTable") -> str:
    """Ghost-array declarations holding the table, for pasting into a ``.mc`` file."""
    n = len(table)
    temps = ", ".join(str(t) for t in table.temperatures)
    codes = ", ".join(str(c) for c in table.codes)
    return (f"//@ ghost integer {prefix}Temp[{n}] = {{{temps}}};\n"
            f"//@ ghost uint16_t {prefix}Code[{n}] = {{{codes}}};\n")
