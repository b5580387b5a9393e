"""Spin Hamiltonians for one electron spin coupled to one nuclear spin.

Builds H = mu_B B.g.S + S.A.I - g_n mu_n B.I - P_z I_z^2 in MHz for an
electron spin S and nuclear spin I sharing a principal-axis frame, and
predicts transition frequencies and intensities.  Shipped presets cover
a d9 transition-metal ion with I=3/2, a substitutional-nitrogen defect
with I=1, and a bare electron.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import MU_B_MHZ_PER_G, MU_N_MHZ_PER_G
from .linalg import jacobi_eigh

MAX_DIMENSION = 16


def spin_operators(s: float):
    """Spin operator triple (Sx, Sy, Sz) in the |m> basis for spin ``s``.

    Built from ladder operators; satisfies [Sx, Sy] = i Sz with Sz
    diagonal, entries s ... -s.

    Raises
    ------
    ValueError
        If 2*s is not a non-negative integer.
    """
    two_s = 2.0 * s
    if not (math.isfinite(s) and s >= 0.0 and abs(two_s - round(two_s)) < 1e-9):
        raise ValueError(f"spin must be a non-negative half-integer, got {s}")
    n = int(round(two_s)) + 1
    m = s - np.arange(n)
    sz = np.diag(m).astype(complex)
    sp = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        sp[i - 1, i] = math.sqrt(s * (s + 1.0) - m[i] * (m[i] + 1.0))
    sm = sp.conj().T
    sx = (sp + sm) / 2.0
    sy = (sp - sm) / 2.0j
    return sx, sy, sz


@dataclass(frozen=True)
class SpinSystem:
    """Electron spin S + nuclear spin I with diagonal g and A tensors.

    Tensors are given by their principal values in the shared
    principal-axis frame; ``a_tensor`` in MHz.  Nuclear Zeeman and
    quadrupole terms enter only when ``g_n`` / ``p_z`` are nonzero.
    """

    s: float
    i: float
    g_tensor: tuple[float, float, float]
    a_tensor: tuple[float, float, float]
    g_n: float = 0.0
    p_z: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "g_tensor", tuple(float(x) for x in self.g_tensor))
        object.__setattr__(self, "a_tensor", tuple(float(x) for x in self.a_tensor))
        if len(self.g_tensor) != 3 or len(self.a_tensor) != 3:
            raise ValueError("g_tensor and a_tensor need exactly 3 principal values")
        vals = (*self.g_tensor, *self.a_tensor, self.g_n, self.p_z)
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("tensor values must be finite")
        # validates the spins as a side effect
        dim_s = len(spin_operators(self.s)[0])
        dim_i = len(spin_operators(self.i)[0])
        if dim_s * dim_i > MAX_DIMENSION:
            raise ValueError(f"Hilbert-space dimension {dim_s * dim_i} exceeds {MAX_DIMENSION}")

    @property
    def dimension(self) -> int:
        return int(round(2 * self.s + 1)) * int(round(2 * self.i + 1))


@dataclass(frozen=True, eq=False)
class FieldConfig:
    """Static magnetic field in the principal-axis frame, components in Gauss."""

    b_vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.b_vector, dtype=float)
        if vec.shape != (3,) or not np.all(np.isfinite(vec)):
            raise ValueError("field must be a finite Cartesian triple in Gauss")
        object.__setattr__(self, "b_vector", vec)

    @classmethod
    def from_angles(cls, b_mag: float, theta: float, phi: float = 0.0) -> "FieldConfig":
        """Field of magnitude ``b_mag`` [G] at polar angle ``theta`` from the
        principal z-axis and azimuth ``phi`` (radians)."""
        if not (math.isfinite(b_mag) and b_mag >= 0.0):
            raise ValueError(f"field magnitude must be >= 0, got {b_mag}")
        st = math.sin(theta)
        return cls(b_vector=b_mag * np.array([st * math.cos(phi),
                                              st * math.sin(phi),
                                              math.cos(theta)]))

    @classmethod
    def from_cartesian(cls, bx: float, by: float, bz: float) -> "FieldConfig":
        return cls(b_vector=np.array([bx, by, bz], dtype=float))

    @property
    def b_mag(self) -> float:
        return float(np.linalg.norm(self.b_vector))


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Transition lines sorted by frequency; intensities normalized to max 1."""

    frequencies: np.ndarray   # MHz, ascending
    intensities: np.ndarray   # dimensionless, strongest = 1

    def strongest(self, k: int) -> np.ndarray:
        """Frequencies of the ``k`` highest-intensity lines, ascending."""
        order = np.argsort(-self.intensities, kind="stable")[:k]
        return np.sort(self.frequencies[order])


def _operator_stack(sys: SpinSystem):
    sx, sy, sz = spin_operators(sys.s)
    ix, iy, iz = spin_operators(sys.i)
    id_s = np.eye(sx.shape[0])
    id_i = np.eye(ix.shape[0])
    s_ops = np.stack([np.kron(op, id_i) for op in (sx, sy, sz)])
    i_ops = np.stack([np.kron(id_s, op) for op in (ix, iy, iz)])
    return s_ops, i_ops


def build_hamiltonians(sys: SpinSystem, b_vectors: np.ndarray) -> np.ndarray:
    """Hamiltonian stack for many field vectors at once, shape (m, dim, dim), MHz."""
    b = np.asarray(b_vectors, dtype=float)
    if b.ndim != 2 or b.shape[1] != 3:
        raise ValueError("b_vectors must have shape (m, 3)")
    s_ops, i_ops = _operator_stack(sys)
    g = np.asarray(sys.g_tensor)
    a = np.asarray(sys.a_tensor)
    h = np.einsum("ma,a,aij->mij", b, MU_B_MHZ_PER_G * g, s_ops)
    h_static = np.einsum("a,aij,ajk->ik", a, s_ops, i_ops)
    if sys.g_n != 0.0:
        h = h - np.einsum("ma,aij->mij", sys.g_n * MU_N_MHZ_PER_G * b, i_ops)
    if sys.p_z != 0.0:
        h_static = h_static - sys.p_z * (i_ops[2] @ i_ops[2])
    return h + h_static


def build_hamiltonian(sys: SpinSystem, fieldcfg: FieldConfig) -> np.ndarray:
    """Spin Hamiltonian in MHz, electron (x) nuclear ordering.

    H = mu_B sum_a B_a g_a S_a + sum_a A_a S_a I_a
        - g_n mu_n sum_a B_a I_a - P_z I_z^2

    using mu_B/h = 1.399624 MHz/G and mu_n/h = 7.62259e-4 MHz/G.
    """
    return build_hamiltonians(sys, fieldcfg.b_vector[None])[0]


def eigen_solve(h):
    """Eigenvalues (MHz, ascending) and eigenvectors of a Hermitian matrix.

    Thin wrapper over the cyclic Jacobi solver; rejects non-Hermitian
    input and guarantees residual ||H v - w v|| <= 1e-8 ||H|| per pair.
    """
    return jacobi_eigh(h)


def _drive_direction(b_vector: np.ndarray) -> np.ndarray:
    # unit vector perpendicular to B inside the B-z principal plane;
    # falls back to x when B is along z or zero
    b_norm = np.linalg.norm(b_vector)
    if b_norm == 0.0:
        return np.array([1.0, 0.0, 0.0])
    b_hat = b_vector / b_norm
    perp = np.array([0.0, 0.0, 1.0]) - b_hat[2] * b_hat
    norm = np.linalg.norm(perp)
    if norm < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return perp / norm


def transition_spectrum(sys: SpinSystem, fieldcfg: FieldConfig,
                        intensity_floor: float = 1e-3,
                        merge_tol: float = 0.1) -> SpectrumResult:
    """Allowed-transition stick spectrum of ``sys`` in the given field.

    Intensity of the i->j line is |<j| S_perp |i>|^2 where S_perp is the
    electron spin component along the unit vector perpendicular to B in
    the B-z principal plane.  Lines weaker than ``intensity_floor``
    times the maximum are dropped; lines within ``merge_tol`` MHz are
    merged with summed intensity.
    """
    h = build_hamiltonian(sys, fieldcfg)
    w, v = eigen_solve(h)
    s_ops, _ = _operator_stack(sys)
    drive = _drive_direction(fieldcfg.b_vector)
    s_perp = np.einsum("a,aij->ij", drive, s_ops)
    mel = v.conj().T @ s_perp @ v
    iu, ju = np.triu_indices(len(w), 1)
    freqs = w[ju] - w[iu]
    ints = np.abs(mel[ju, iu]) ** 2
    return _assemble_lines(freqs, ints, intensity_floor, merge_tol)


def _assemble_lines(freqs: np.ndarray, ints: np.ndarray,
                    intensity_floor: float, merge_tol: float) -> SpectrumResult:
    max_int = ints.max() if ints.size else 0.0
    if max_int <= 0.0:
        return SpectrumResult(np.empty(0), np.empty(0))
    keep = ints >= intensity_floor * max_int
    freqs, ints = freqs[keep], ints[keep]
    order = np.argsort(freqs, kind="stable")
    freqs, ints = freqs[order], ints[order]
    merged_f, merged_i = [], []
    for f, s in zip(freqs, ints):
        if merged_f and f - merged_f[-1] <= merge_tol:
            total = merged_i[-1] + s
            merged_f[-1] = (merged_f[-1] * merged_i[-1] + f * s) / total
            merged_i[-1] = total
        else:
            merged_f.append(f)
            merged_i.append(s)
    out_f = np.array(merged_f)
    out_i = np.array(merged_i)
    return SpectrumResult(out_f, out_i / out_i.max())


# Shipped spin systems; all values overridable by constructing SpinSystem
# directly or through the CLI config schema.
PRESETS: dict[str, SpinSystem] = {
    "Cu2+": SpinSystem(
        s=0.5, i=1.5,
        g_tensor=(-2.0835, -2.0835, -2.415),
        a_tensor=(30.0, 30.0, 339.0),
        name="Cu2+",
    ),
    "P1": SpinSystem(
        s=0.5, i=1.0,
        g_tensor=(-2.0024, -2.0024, -2.0025),
        a_tensor=(82.0, 82.0, 114.0),
        g_n=0.403,
        p_z=-5.6,
        name="P1",
    ),
    "free-electron": SpinSystem(
        s=0.5, i=0.0,
        g_tensor=(2.0023, 2.0023, 2.0023),
        a_tensor=(0.0, 0.0, 0.0),
        name="free-electron",
    ),
}


def get_preset(name: str) -> SpinSystem:
    """Look up a shipped spin system by name."""
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown spin-system preset {name!r}; known presets: {known}") from None
