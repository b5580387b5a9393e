"""Sensing-volume estimates for a sensor under a spin-bearing film.

Walks the full chain: the distance-scale constant kappa, the depth at
which the accumulated n*cbar^2 crosses the detectability threshold, the
radius enclosing a chosen fraction of the signal, and the normalized
dip depth as a function of n*cbar^2 that motivates the threshold choice.
"""

from pathlib import Path

import numpy as np

from nvdeer import (DrivePulse, SampleGeometry, SensingModel, accumulate_nc2,
                    detectability_radius, ensemble_signal, kappa_constant,
                    prefactor_at, threshold_depth)

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

OUT = Path(__file__).resolve().parent / "output"


def main():
    OUT.mkdir(exist_ok=True)
    tau = 6.0
    kappa = kappa_constant(tau)
    print(f"kappa({tau} us) = {kappa:.1f} nm^3 = ({kappa ** (1/3):.2f} nm)^3")
    for r in (4.6, 9.9, 20.0):
        print(f"  c(r = {r:4.1f} nm) = {prefactor_at(r, SensingModel(kappa=kappa)):7.3f}")

    rho = 0.6
    model = SensingModel(kappa=kappa)
    geom = SampleGeometry(nv_depth=70.0, spin_density=rho)
    total = accumulate_nc2(geom, model)
    print(f"\nuniform density {rho} nm^-3, depth 70 nm: n c^2 = {total:.3f}")
    h_star = threshold_depth(geom, model)
    print(f"threshold depth (n c^2 = 1):  {h_star:.1f} nm")
    res = detectability_radius(geom, model, 0.7)
    print(f"radius holding 70% of the signal at depth 70 nm: {res.radius:.0f} nm")

    # normalized dip depth against total coupling, at a resonant pi pulse
    pulse = DrivePulse(rabi_freq=5.0, detuning=0.0, length=0.1)
    n_c2 = np.geomspace(1e-2, 1e2, 200)
    dip = np.array([1.0 - ensemble_signal(float(x), pulse).value for x in n_c2])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.semilogx(n_c2, dip)
    ax1.axvline(1.0, color="k", lw=1)
    ax1.set_xlabel("n c^2")
    ax1.set_ylabel("normalized dip depth 1 - f")
    ax1.set_title("ensemble dip depth; threshold n c^2 = 1")

    depths = np.linspace(20.0, 200.0, 100)
    totals = [accumulate_nc2(SampleGeometry(nv_depth=float(h), spin_density=rho),
                             model) for h in depths]
    ax2.semilogy(depths, totals)
    ax2.axhline(1.0, color="k", lw=1)
    ax2.axvline(h_star, color="gray", ls=":")
    ax2.set_xlabel("sensor depth (nm)")
    ax2.set_ylabel("accumulated n c^2")
    ax2.set_title(f"signal vs depth (threshold at {h_star:.0f} nm)")
    fig.tight_layout()
    target = OUT / "sensing_volume.png"
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
