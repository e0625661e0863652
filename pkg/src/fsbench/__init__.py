"""Feature subset selection on synthetic problems with known optimal solutions."""

__version__ = "0.1.0"
