"""Figure rendering for sweep reports: one PNG per metric, written next to
the delimited output."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import SweepReport

_METRICS = (
    ("distance_m", "D_distance", "Average distance to failure (m)"),
    ("success_pct", "S_success", "Success rate (%)"),
    ("collision_pct", "C_collision", "Step collision rate (%)"),
)

_STYLES = {
    "semantic": dict(color="tab:green", marker="o"),
    "geometric_proxy": dict(color="tab:orange", marker="s"),
    "blind": dict(color="tab:red", marker="x"),
}


def render_sweep_figures(report: SweepReport, out_dir) -> list[str]:
    """Write D/S/C-versus-density figures for every policy in the report.

    Returns the list of written file paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    policies = list(dict.fromkeys(c.policy for c in report.cells))
    written = []
    for attr, stem, label in _METRICS:
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for policy in policies:
            cells = sorted(
                (c for c in report.cells if c.policy == policy), key=lambda c: c.density
            )
            ax.plot(
                [c.density for c in cells],
                [getattr(c, attr) for c in cells],
                label=policy,
                **_STYLES.get(policy, {}),
            )
        ax.set_xlabel("obstacle density (1/m$^2$)")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
