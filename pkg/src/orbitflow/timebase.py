"""Simulated-time conventions shared across the package.

Every timestamp in the system is a simulated clock value: seconds since the
simulation epoch, carried as a plain float and injected by callers.  No module
reads the wall clock.  Calendar dates (product acquisition dates) are
``datetime.date`` values anchored at ``EPOCH_DATE``.
"""

from __future__ import annotations

from datetime import date, timedelta

SECONDS_PER_DAY = 86_400.0

# Calendar anchor for simulated day 0.
EPOCH_DATE = date(2026, 1, 1)


def fmt_ts(t: float) -> str:
    """Render a timestamp so that ``parse_ts(fmt_ts(t)) == t`` exactly.

    Whole-second values render without a fractional part; everything else uses
    Python's shortest round-tripping float repr.
    """
    f = float(t)
    if f == int(f):
        return str(int(f))
    return repr(f)


def parse_ts(s: str) -> float:
    return float(s)


def day_index(t: float) -> int:
    """Simulated day containing timestamp ``t``."""
    return int(t // SECONDS_PER_DAY)


def date_for_day(day: int) -> date:
    return EPOCH_DATE + timedelta(days=day)
