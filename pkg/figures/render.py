"""Render figures from the simulator CLI's CSV outputs.

Usage:
    python figures/render.py --figure fig3 --in results/engine_omega2_slow --out fig3.png

Each figure reads the CSV files one experiment run writes:

    fig1  ratios.csv        adiabaticity-ratio heatmaps, direction x temperature
    fig2  contacts.csv      distance to the current bath over the contact sequence,
          thermal_scan.csv  plus distance to thermal states across temperatures
    fig3  cycles.csv        stroke energies, efficiency and power per cycle
    fig4  errors.csv        integrator error against step divisor, log-log

For fig2 and fig3 the input directory may instead hold several run
directories; every run found is overlaid. Rendering is read-only: nothing
is computed from the data beyond axis transforms.
"""

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE = Path(__file__).with_name("otto.mplstyle")

FIGURES = ("fig1", "fig2", "fig3", "fig4")

# required file -> required columns, per figure; these mirror the CLI's
# writer schemas and are validated before anything is drawn
SCHEMAS = {
    "fig1": {"ratios.csv": ("omega", "tau_alpha", "omega_T", "direction", "ratio")},
    "fig2": {
        "contacts.csv": ("tau", "trace_distance", "bath_index", "step", "phi0"),
        "thermal_scan.csv": ("omega_T", "trace_distance"),
    },
    "fig3": {
        "cycles.csv": (
            "cycle",
            "e_expanded_cold",
            "e_compressed_cold",
            "e_compressed_hot",
            "e_expanded_hot",
            "work",
            "heat_in",
            "efficiency",
            "power",
            "state_change",
        ),
    },
    "fig4": {"errors.csv": ("mode", "alpha", "divisor", "error")},
}

STRING_COLUMNS = {"direction", "mode"}

LINESTYLES = ("-", "--", ":", "-.")


class SchemaError(Exception):
    """Input files absent or their headers incomplete."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    indir: Path
    out: Path
    style: Path = STYLE


def load_table(path: Path, columns) -> dict:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or ()
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        rows = list(reader)
    table = {}
    for c in columns:
        if c in STRING_COLUMNS:
            table[c] = np.array([r[c] for r in rows])
        else:
            table[c] = np.array([float(r[c]) for r in rows])
    return table


def discover_runs(indir: Path, filenames):
    """The input is either one run directory or a directory of them."""
    if all((indir / f).is_file() for f in filenames):
        return [(indir.name, indir)]
    runs = [(p.name, p) for p in sorted(indir.iterdir())
            if p.is_dir() and all((p / f).is_file() for f in filenames)]
    if not runs:
        missing = [f for f in filenames if not (indir / f).is_file()]
        raise SchemaError(f"{indir}: missing file(s): {', '.join(missing)}")
    return runs


def _edges(centers, log=False):
    # cell edges for pcolormesh: midpoints between centers, geometric on
    # log axes, end cells mirrored
    c = np.log(centers) if log else np.asarray(centers, dtype=float)
    if len(c) == 1:
        inner = np.array([])
        lo, hi = c[0] - 0.5, c[0] + 0.5
    else:
        inner = (c[:-1] + c[1:]) / 2.0
        lo, hi = 2.0 * c[0] - inner[0], 2.0 * c[-1] - inner[-1]
    e = np.concatenate(([lo], inner, [hi]))
    return np.exp(e) if log else e


def render_fig1(spec: FigureSpec):
    _, run = discover_runs(spec.indir, ["ratios.csv"])[0]
    t = load_table(run / "ratios.csv", SCHEMAS["fig1"]["ratios.csv"])
    taus = np.unique(t["tau_alpha"])
    omegas = np.unique(t["omega"])
    temps = np.unique(t["omega_T"])

    fig, axes = plt.subplots(2, len(temps), figsize=(3.3 * len(temps), 5.2),
                             squeeze=False, sharex=True, sharey=True)
    for i, direction in enumerate(("compression", "expansion")):
        for j, wt in enumerate(temps):
            ax = axes[i][j]
            mask = (t["direction"] == direction) & (t["omega_T"] == wt)
            grid = np.full((len(omegas), len(taus)), np.nan)
            oi = np.searchsorted(omegas, t["omega"][mask])
            ti = np.searchsorted(taus, t["tau_alpha"][mask])
            grid[oi, ti] = t["ratio"][mask]
            mesh = ax.pcolormesh(_edges(taus, log=True), _edges(omegas), grid,
                                 cmap="viridis")
            ax.set_xscale("log")
            fig.colorbar(mesh, ax=ax, label="final / adiabatic energy")
            ax.set_title(f"{direction}, \N{GREEK SMALL LETTER OMEGA}_T = {wt:g}")
            if i == 1:
                ax.set_xlabel("ramp duration \N{GREEK SMALL LETTER TAU} (periods)")
            if j == 0:
                ax.set_ylabel("frequency ratio \N{GREEK SMALL LETTER OMEGA}")
    fig.savefig(spec.out)


def render_fig2(spec: FigureSpec):
    runs = discover_runs(spec.indir, list(SCHEMAS["fig2"]))
    fig, (ax_seq, ax_scan) = plt.subplots(1, 2, figsize=(7.2, 3.1))
    for name, run in runs:
        contacts = load_table(run / "contacts.csv", SCHEMAS["fig2"]["contacts.csv"])
        scan = load_table(run / "thermal_scan.csv", SCHEMAS["fig2"]["thermal_scan.csv"])
        ax_seq.semilogy(contacts["tau"], contacts["trace_distance"], label=name)
        ax_scan.semilogy(scan["omega_T"], scan["trace_distance"], label=name)
    for wt in (1.0, 5.0):
        ax_scan.axvline(wt, color="0.45", linestyle="--", linewidth=0.9, zorder=0)
    ax_seq.set_xlabel("time \N{GREEK SMALL LETTER TAU} (periods)")
    ax_seq.set_ylabel("trace distance to current bath")
    ax_seq.set_title("contact sequence")
    ax_scan.set_xlabel("\N{GREEK SMALL LETTER OMEGA}_T")
    ax_scan.set_ylabel("trace distance to thermal state")
    ax_scan.set_title("final state vs thermal family")
    if len(runs) > 1:
        ax_seq.legend()
        ax_scan.legend()
    fig.savefig(spec.out)


STROKE_SERIES = (
    ("e_expanded_cold", "expanded cold"),
    ("e_compressed_cold", "compressed cold"),
    ("e_compressed_hot", "compressed hot"),
    ("e_expanded_hot", "expanded hot"),
)

CYCLE_ORDER = ("per cycle: expanded cold \N{RIGHTWARDS ARROW} compressed cold "
               "\N{RIGHTWARDS ARROW} compressed hot \N{RIGHTWARDS ARROW} expanded hot")


def render_fig3(spec: FigureSpec):
    runs = discover_runs(spec.indir, ["cycles.csv"])
    fig = plt.figure(figsize=(7.2, 5.4))
    grid = fig.add_gridspec(2, 2)
    ax_e = fig.add_subplot(grid[0, :])
    ax_eff = fig.add_subplot(grid[1, 0])
    ax_pow = fig.add_subplot(grid[1, 1])

    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, (name, run) in enumerate(runs):
        t = load_table(run / "cycles.csv", SCHEMAS["fig3"]["cycles.csv"])
        ls = LINESTYLES[k % len(LINESTYLES)]
        for ci, (column, label) in enumerate(STROKE_SERIES):
            ax_e.plot(t["cycle"], t[column], ls, color=colors[ci],
                      label=label if k == 0 else None)
        ax_eff.plot(t["cycle"], t["efficiency"], ls, color=colors[k % len(colors)],
                    label=name)
        ax_pow.plot(t["cycle"], t["power"], ls, color=colors[k % len(colors)])
    ax_e.set_xlabel("cycle")
    ax_e.set_ylabel("energy at stroke boundaries")
    ax_e.legend(ncols=4, loc="upper right")
    ax_e.text(0.02, 0.04, CYCLE_ORDER, transform=ax_e.transAxes, fontsize=8,
              color="0.25")
    ax_eff.set_xlabel("cycle")
    ax_eff.set_ylabel("efficiency")
    if len(runs) > 1:
        ax_eff.legend()
    ax_pow.set_xlabel("cycle")
    ax_pow.set_ylabel("power (energy / period)")
    fig.savefig(spec.out)


def render_fig4(spec: FigureSpec):
    _, run = discover_runs(spec.indir, ["errors.csv"])[0]
    t = load_table(run / "errors.csv", SCHEMAS["fig4"]["errors.csv"])
    fig, ax = plt.subplots(figsize=(4.4, 3.3))
    for mode in np.unique(t["mode"]):
        for alpha in np.unique(t["alpha"]):
            sel = (t["mode"] == mode) & (t["alpha"] == alpha) & (t["error"] > 0)
            if not sel.any():
                continue
            order = np.argsort(t["divisor"][sel])
            ax.loglog(t["divisor"][sel][order], t["error"][sel][order],
                      marker="o",
                      label=f"{mode}, \N{GREEK SMALL LETTER ALPHA} = {alpha:g}")
    ax.set_xlabel("step divisor")
    ax.set_ylabel("trace distance to finest step")
    ax.legend()
    fig.savefig(spec.out)


RENDERERS = {
    "fig1": render_fig1,
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4": render_fig4,
}


def render(spec: FigureSpec):
    plt.style.use(spec.style)
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    RENDERERS[spec.figure_id](spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--figure", required=True, choices=FIGURES)
    parser.add_argument("--in", dest="indir", required=True, type=Path,
                        help="run directory with the CSV outputs, or a directory "
                             "of run directories (fig2, fig3)")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--style", type=Path, default=STYLE)
    args = parser.parse_args(argv)

    spec = FigureSpec(args.figure, args.indir, args.out, args.style)
    try:
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"render.py: {exc}", file=sys.stderr)
        return 2
    print(spec.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
