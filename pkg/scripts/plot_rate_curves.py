"""Plot the comparator secret-key-rate curves on both error axes.

Writes rate_curves_der.png and rate_curves_ber.png into --output-dir,
one line per protocol with its noise threshold marked on the x axis.

Usage:
    python3 scripts/plot_rate_curves.py [--output-dir DIR] [--points N]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from quditqkd.protocol_rates import (
    DEFAULT_PROTOCOLS,
    RateCurveSpec,
    curve_value,
    emit_curve,
    find_threshold,
)

X_MAX = {"der": 0.24, "ber": 0.17}
LABELS = {
    "six_state": "six-state",
    "bb84": "BB84",
    "ss4_unbiased": "SS4 (unbiased)",
    "ss4_biased": "SS4 (biased)",
    "ss4_extreme": "SS4 (extreme bias)",
    "cww4_der": "CWW4",
    "cww4_ber": "CWW4 (reduced model)",
}
AXIS_NAME = {"der": "dit error rate", "ber": "bit error rate"}


def plot_axis(axis, points, output_dir):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for protocol in DEFAULT_PROTOCOLS[axis]:
        grid = tuple(np.linspace(0.0, X_MAX[axis], points))
        spec = RateCurveSpec(protocol=protocol, axis=axis, grid=grid)
        curve = emit_curve(spec)
        (line,) = ax.plot(curve[:, 0], curve[:, 1], label=LABELS[protocol])
        threshold = find_threshold(
            lambda x: curve_value(spec, x), 1e-6, X_MAX[axis], tol=1e-7
        )
        ax.axvline(threshold, color=line.get_color(), alpha=0.25, lw=0.8)
    ax.set_xlabel(AXIS_NAME[axis])
    ax.set_ylabel("secret key rate per sifted symbol")
    ax.set_xlim(0.0, X_MAX[axis])
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    out = Path(output_dir) / f"rate_curves_{axis}.png"
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    print(f"wrote {out}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--output-dir", default=".", help="where to write the PNGs")
    parser.add_argument(
        "--points", type=int, default=400, help="grid points per curve"
    )
    args = parser.parse_args(argv)
    Path(args.output_dir).mkdir(parents=True, exist_ok=True)
    for axis in ("der", "ber"):
        plot_axis(axis, args.points, args.output_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
