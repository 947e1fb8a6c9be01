from __future__ import annotations

from dataclasses import dataclass

from .bures import bures_gqd
from .discord import classical_correlation, quantum_discord
from .entanglement import geometric_entanglement, ree
from .entropy import as_matrix, mutual_information
from .result import MeasureResult

MEASURES = ("MI", "CC", "QD", "GQD", "REE", "GE")


@dataclass
class CorrelationSuite:
    MI: MeasureResult | None = None
    CC: MeasureResult | None = None
    QD: MeasureResult | None = None
    GQD: MeasureResult | None = None
    REE: MeasureResult | None = None
    GE: MeasureResult | None = None
    p_vac: float | None = None

    def row(self) -> dict:
        """Flat values keyed by CSV column name; unselected measures are None."""

        def val(m):
            return None if m is None else float(m.value)

        return {
            "p_vac": self.p_vac,
            "MI": val(self.MI),
            "CC": val(self.CC),
            "QD": val(self.QD),
            "GQD_B_norm": val(self.GQD),
            "GQD_B_raw": None if self.GQD is None else float(self.GQD.certificate["raw"]),
            "REE": val(self.REE),
            "GE": val(self.GE),
            "CC_theta": None if self.CC is None else float(self.CC.argument[0]),
            "GQD_theta": None if self.GQD is None else float(self.GQD.argument["axis"][0]),
        }


def evaluate_suite(x, measures=MEASURES, p_vac: float | None = None,
                   gqd_starts: int | None = None) -> CorrelationSuite:
    """Evaluate the selected measures on one two-qubit state."""
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures {sorted(unknown)}; expected a subset of {MEASURES}")
    rho = as_matrix(x)
    suite = CorrelationSuite(p_vac=p_vac)
    if "MI" in measures or "QD" in measures:
        suite.MI = MeasureResult(mutual_information(rho))
    if "CC" in measures or "QD" in measures:
        suite.CC = classical_correlation(rho)
    if "QD" in measures:
        suite.QD = quantum_discord(rho, suite.CC)
    if "GQD" in measures:
        suite.GQD = bures_gqd(x) if gqd_starts is None else bures_gqd(x, n_starts=gqd_starts)
    if "REE" in measures:
        suite.REE = ree(x)
    if "GE" in measures:
        suite.GE = geometric_entanglement(x)
    return suite
