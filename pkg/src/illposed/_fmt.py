"""Float-to-text helpers shared by the CSV and JSON writers."""

from __future__ import annotations


def format_float(value: float, round_to: int | None = None) -> str:
    """Render a double for tabular output.

    The default uses 17 significant digits, which round-trips every
    double exactly.  `round_to` switches to fixed decimals for matching
    hand-rounded tables.
    """
    if round_to is not None:
        return f"{value:.{round_to}f}"
    return f"{value:.17g}"
