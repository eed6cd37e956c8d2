"""Enumeration guards.

Every exhaustive search in the package is bounded by one of these limits and
raises :class:`ghforge.errors.TooLarge` beyond it.  The environment variable
``GHFORGE_GUARD`` (an integer) overrides the point-count guards at run time.
"""

import os

# |X| + |Y| bounds for correspondence enumeration and the brute-force oracle.
CORRESPONDENCE_GUARD = 12
ORACLE_GUARD = 10

# 2**SUBSET_BITS caps any "test all subsets" scan (Prokhorov, total variation,
# covering numbers, candidate sub-point-sets in the pointed metric).
SUBSET_BITS = 12

# Point count up to which covering numbers are solved exactly by default.
COVER_EXACT_POINTS = 16


def _env_override():
    raw = os.environ.get("GHFORGE_GUARD")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def correspondence_guard():
    return _env_override() or CORRESPONDENCE_GUARD


def oracle_guard():
    return _env_override() or ORACLE_GUARD


def subset_bits():
    return _env_override() or SUBSET_BITS
