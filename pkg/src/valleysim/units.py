"""Unit conversions, fixed in one place.

External interfaces speak eV, Angstrom, fs and V/Angstrom; the propagator
works in Hartree atomic units.
"""

HARTREE_EV = 27.211386245988          # 1 Ha in eV
BOHR_ANGSTROM = 0.529177210903        # 1 bohr in Angstrom
AU_TIME_FS = 0.024188843265857        # 1 a.u. of time in fs
AU_FIELD_V_PER_ANGSTROM = 51.422067476  # 1 a.u. of electric field in V/Angstrom

# hbar in eV*fs; equals HARTREE_EV * AU_TIME_FS = 0.6582119569...
HBAR_EV_FS = HARTREE_EV * AU_TIME_FS


def ev_to_hartree(e):
    return e / HARTREE_EV


def hartree_to_ev(e):
    return e * HARTREE_EV


def fs_to_au(t):
    return t / AU_TIME_FS


def au_to_fs(t):
    return t * AU_TIME_FS


def field_to_au(f):
    """V/Angstrom -> a.u."""
    return f / AU_FIELD_V_PER_ANGSTROM
