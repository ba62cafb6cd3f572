"""Formatted exponent tables for the command line."""

from typing import Any, Dict, List, Sequence

from src.diagnostics.exponents import (
    SIX_FIFTHS,
    THREE_HALVES,
    Number,
    exponent_report,
    fixed_point_g,
)


def exponent_rows(alphas: Sequence[Number]) -> List[Dict[str, Any]]:
    """
    One row per exponent: theta, theta~, gradient exponent, beta, flags, Moser limit.

    The Moser limit G(alpha) + 1 is given only on (6/5, 3/2), where the
    bootstrap is defined.

    Raises:
        ParameterError: If any alpha <= 1
    """
    rows = []
    for alpha in alphas:
        report = exponent_report(alpha)
        moser = float(fixed_point_g(alpha)) + 1.0 if SIX_FIFTHS < alpha < THREE_HALVES else None
        rows.append(
            {
                "alpha": alpha,
                "theta": report.theta,
                "theta_tilde": report.theta_tilde,
                "gradient_exponent": report.gradient_exponent,
                "beta": report.beta_dual,
                "passes_6_5": report.passes_6_5,
                "passes_alpha_star": report.passes_alpha_star,
                "moser_limit": moser,
            }
        )
    return rows


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "✓" if value else "❌"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def exponent_table(alphas: Sequence[Number]) -> str:
    """Boxed text table of ``exponent_rows``."""
    header = ("alpha", "theta", "theta~", "grad exp", "beta", ">6/5", ">a*", "Moser lim")
    rows = [[_cell(v) for v in row.values()] for row in exponent_rows(alphas)]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]

    def line(cells):
        return "║ " + " │ ".join(c.ljust(w) for c, w in zip(cells, widths)) + " ║"

    rule = "═" * (sum(widths) + 3 * (len(widths) - 1) + 2)
    out = ["╔" + rule + "╗", line(header), "╠" + rule + "╣"]
    out.extend(line(r) for r in rows)
    out.append("╚" + rule + "╝")
    return "\n".join(out)
