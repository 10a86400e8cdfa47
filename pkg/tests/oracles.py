"""Reference implementations that share no code with the package.

Each oracle is written from the problem statement alone: the thermistor
formulas in arbitrary precision, the temperature monitor as a plain state
machine, and behavior completeness/disjointness as set algebra.
"""

from __future__ import annotations

import itertools

import mpmath

mpmath.mp.dps = 50

R0, BETA, T0_K, R_SERIES, V_SUPPLY, COUNTS = 10000, 3988, mpmath.mpf("298.15"), 5360, 5, 250


def mp_resistance(t):
    return R0 * mpmath.exp(BETA * (1 / (mpmath.mpf(t) + mpmath.mpf("273.15")) - 1 / T0_K))


def mp_voltage(t):
    r = mp_resistance(t)
    return V_SUPPLY * r / (r + R_SERIES)


def mp_code_real(t):
    """250*U(T) + 0.5 in 50-digit arithmetic."""
    return COUNTS * mp_voltage(t) + mpmath.mpf("0.5")


def mp_code(t):
    return int(mpmath.floor(mp_code_real(t)))


def pwl_sweep_max_error(table_entries, t_min, t_max, step_hundredths=1):
    """Max |pwl(T) - (250 U(T) + 0.5)| over T = t_min, t_min + 0.01, ..., t_max.

    The interpolant is evaluated exactly in rationals-as-mpf from the table.
    """
    temps = [t for t, _ in table_entries]
    codes = [c for _, c in table_entries]
    worst = mpmath.mpf(0)
    j = 0
    for k in range(0, (t_max - t_min) * 100 + 1, step_hundredths):
        t = mpmath.mpf(t_min) + mpmath.mpf(k) / 100
        while j < len(temps) - 2 and temps[j + 1] <= t:
            j += 1
        t0, t1, c0, c1 = temps[j], temps[j + 1], codes[j], codes[j + 1]
        pwl = c0 + (c1 - c0) * (t - t0) / (t1 - t0)
        worst = max(worst, abs(pwl - mp_code_real(t)))
    return worst


# -- temperature monitor reference -------------------------------------------------------

TEMP_FAIL, EC_OK, EC_TEMP = 5, 0, 7


def reference_monitor(readings, errcnt=0):
    """Yield (result, errcnt after the step) for each (t1, t2) reading."""
    out = []
    for t1, t2 in readings:
        if abs(t1 - t2) > TEMP_FAIL:
            if errcnt <= 2:
                errcnt += 1
                result = EC_OK
            else:
                result = EC_TEMP
        else:
            errcnt = 0
            result = EC_OK
        out.append((result, errcnt))
    return out


# -- behavior sets -------------------------------------------------------------------------

def brute_force_behavior_sets(guards, domains):
    """(complete, disjoint) by direct set computation over the full product.

    ``guards`` are Python predicates over a dict point; ``domains`` maps name -> values.
    """
    names = sorted(domains)
    universe = [dict(zip(names, vals)) for vals in itertools.product(*(domains[n] for n in names))]
    covered = [frozenset(i for i, p in enumerate(universe) if g(p)) for g in guards]
    everything = frozenset(range(len(universe)))
    complete = frozenset().union(*covered) == everything if covered else not universe
    disjoint = all(not (a & b) for a, b in itertools.combinations(covered, 2))
    return complete, disjoint
