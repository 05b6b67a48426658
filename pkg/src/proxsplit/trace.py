"""Convergence traces: per-iteration progress records and their CSV form.

The CSV layout is fixed so traces from different solvers can be compared
and re-plotted: a `# setup_seconds=...` metadata line, the header
`iter,seconds,objective,dist_ref,zeros_exact,zeros_tol`, then one row per
record.  Floats are written with 17 significant digits so a re-parse
reproduces the in-memory trace exactly.
"""

import io
from dataclasses import dataclass, field

from .errors import DomainError, ParseError

CSV_HEADER = "iter,seconds,objective,dist_ref,zeros_exact,zeros_tol"

# |w_j| at or below this counts as a "numerical zero" in the zeros_tol column
ZEROS_TOL = 1e-8


def _fmt(x):
    return format(float(x), ".17g")


@dataclass
class TraceRecord:
    iteration: int
    seconds: float
    objective: float
    dist_ref: object  # float or None when no reference was supplied
    zeros_exact: int
    zeros_tol: int


@dataclass
class ConvergenceTrace:
    """Progress records of one solver run plus the setup time spent before
    iterating (preconditioner factorization, state allocation)."""

    setup_seconds: float = 0.0
    records: list = field(default_factory=list)
    # auxiliary per-run arrays (e.g. step sizes); not part of the CSV format
    extra: dict = field(default_factory=dict)

    def append(self, record):
        if self.records:
            last = self.records[-1]
            if record.iteration <= last.iteration:
                raise DomainError("trace iterations must be strictly increasing")
            if record.seconds < last.seconds:
                raise DomainError("trace seconds must be nondecreasing")
        self.records.append(record)

    @property
    def final(self):
        if not self.records:
            raise DomainError("empty trace")
        return self.records[-1]

    def to_csv(self, sink=None):
        """Write the trace as CSV; returns the text when sink is None."""
        out = sink if sink is not None else io.StringIO()
        out.write("# setup_seconds=%s\n" % _fmt(self.setup_seconds))
        out.write(CSV_HEADER + "\n")
        for r in self.records:
            dist = "" if r.dist_ref is None else _fmt(r.dist_ref)
            out.write(
                "%d,%s,%s,%s,%d,%d\n"
                % (r.iteration, _fmt(r.seconds), _fmt(r.objective), dist, r.zeros_exact, r.zeros_tol)
            )
        if sink is None:
            return out.getvalue()
        return None

    def write_csv(self, path):
        with open(path, "w") as f:
            self.to_csv(f)

    @classmethod
    def from_csv(cls, source):
        """Parse a trace written by to_csv; source is text or a line iterable."""
        if isinstance(source, str):
            source = io.StringIO(source)
        trace = cls()
        header_seen = False
        for lineno, raw in enumerate(source, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    if key.strip() == "setup_seconds":
                        trace.setup_seconds = float(val)
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise ParseError("unexpected trace header %r" % line, lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ParseError("expected 6 fields, got %d" % len(parts), lineno)
            try:
                trace.append(
                    TraceRecord(
                        iteration=int(parts[0]),
                        seconds=float(parts[1]),
                        objective=float(parts[2]),
                        dist_ref=None if parts[3] == "" else float(parts[3]),
                        zeros_exact=int(parts[4]),
                        zeros_tol=int(parts[5]),
                    )
                )
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
        if not header_seen:
            raise ParseError("no trace header found", 0)
        return trace


def plateau_hit(trace, window, rtol):
    """True when the newest record's objective moved by at most rtol
    (relative) since the latest record at least `window` iterations older."""
    recs = trace.records
    if len(recs) < 2:
        return False
    last = recs[-1]
    target = last.iteration - window
    for r in reversed(recs[:-1]):
        if r.iteration <= target:
            return abs(last.objective - r.objective) <= rtol * max(1.0, abs(last.objective))
    return False
