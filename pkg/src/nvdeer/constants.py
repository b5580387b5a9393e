"""Physical constants and the unit conventions used across the package.

Unit conventions (global): ordinary frequencies in MHz, times in
microseconds, magnetic fields in Gauss, distances in nm.  Angular
factors of 2*pi are applied internally wherever a rotation angle or a
phase is formed, so a resonant pulse with rabi_freq * length = 1/2 is a
pi pulse.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class ConstantsTable:
    """CODATA 2018 values, fixed at build time (6+ significant figures).

    Attributes
    ----------
    mu0 : vacuum permeability [T m / A]
    gamma_e : electron gyromagnetic ratio [rad s^-1 T^-1]
    hbar : reduced Planck constant [J s]
    mu_B : Bohr magneton [J / T]
    mu_n : nuclear magneton [J / T]
    g_free : free-electron g-factor [dimensionless]
    """

    mu0: float = 1.25663706e-6
    gamma_e: float = 1.76085963e11
    hbar: float = 1.05457182e-34
    mu_B: float = 9.27401008e-24
    mu_n: float = 5.05078375e-27
    g_free: float = 2.00231931


CODATA = ConstantsTable()

# Zeeman conversion factors, pinned so spectra are bit-reproducible.
MU_B_MHZ_PER_G = 1.399624     # Bohr magneton / h  [MHz / G]
MU_N_MHZ_PER_G = 7.62259e-4   # nuclear magneton / h  [MHz / G]

AVOGADRO = 6.02214076e23      # [1 / mol]

# SI scale factors for the package-wide unit conventions.
NM = 1e-9    # nm -> m
US = 1e-6    # microsecond -> s
