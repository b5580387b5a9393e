"""Transition spectra of the shipped spin systems.

Prints the stick spectra of the bare surface electron, the
substitutional-nitrogen defect, and the d9 copper ion at the fields
used in the field fit, and plots Gaussian-broadened versions of the two
copper candidates.
"""

from math import radians
from pathlib import Path

import numpy as np

from nvdeer import FieldConfig, get_preset, transition_spectrum

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

OUT = Path(__file__).resolve().parent / "output"


def show(label, system, field):
    spec = transition_spectrum(system, field)
    print(f"\n{label}")
    print("  freq (MHz)   intensity")
    for f, s in zip(spec.frequencies, spec.intensities):
        print(f"  {f:10.2f}   {s:9.4f}")
    return spec


def broadened(spec, grid, fwhm=8.0):
    sigma = fwhm / (2 * np.sqrt(2 * np.log(2)))
    out = np.zeros_like(grid)
    for f, s in zip(spec.frequencies, spec.intensities):
        out += s * np.exp(-0.5 * ((grid - f) / sigma) ** 2)
    return out / out.max()


def main():
    OUT.mkdir(exist_ok=True)
    show("free electron at 200 G",
         get_preset("free-electron"), FieldConfig.from_angles(200.0, 0.0))
    show("substitutional nitrogen at B = (114, 0, 163) G",
         get_preset("P1"), FieldConfig.from_cartesian(114.0, 0.0, 163.0))

    cu = get_preset("Cu2+")
    spec_a = show("Cu2+ at B = 192 G, theta = 29 deg",
                  cu, FieldConfig.from_angles(192.0, radians(29.0)))
    spec_b = show("Cu2+ at B = 220 G, theta = 50 deg",
                  cu, FieldConfig.from_angles(220.0, radians(50.0)))

    grid = np.linspace(0.0, 1300.0, 2600)
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(grid, broadened(spec_a, grid), color="tab:red")
    axes[0].set_title("Cu2+ at (192 G, 29 deg)")
    axes[1].plot(grid, broadened(spec_b, grid), color="tab:red")
    axes[1].set_title("Cu2+ at (220 G, 50 deg)")
    for ax in axes:
        for f in (486.0, 811.0, 1104.0):
            ax.axvline(f, color="tab:blue", ls=":", lw=1)
        ax.set_ylabel("intensity (norm.)")
    axes[1].set_xlabel("frequency (MHz)")
    fig.tight_layout()
    target = OUT / "epr_spectra.png"
    fig.savefig(target, dpi=150)
    print(f"\nwrote {target}")
    print("dotted lines mark the observed resonances 486 / 811 / 1104 MHz;")
    print("note the extra strong line near 587 MHz in the second parameter set")


if __name__ == "__main__":
    main()
