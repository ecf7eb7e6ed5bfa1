import numpy as np
import pytest

import valleysim as vs
from valleysim.lattice import WannierModel


def assemble_wannier(num_bands, terms, a=2.5):
    """Build a WannierModel from (R, m, n, value) hopping terms.

    Hermitian partners are the caller's responsibility; duplicate terms
    accumulate.
    """
    blocks = {}
    for R, m, n, val in terms:
        blocks.setdefault(tuple(R), np.zeros((num_bands, num_bands), complex))[m, n] += val
    rpts = np.array(sorted(blocks), int)
    h_r = np.array([blocks[tuple(R)] for R in rpts])
    lat = np.array([[a, 0.0, 0.0],
                    [a / 2.0, a * np.sqrt(3) / 2.0, 0.0],
                    [0.0, 0.0, 20.0]])
    return WannierModel(num_bands=num_bands, rpoints=rpts,
                        degeneracies=np.ones(len(rpts), int),
                        h_r=h_r, lattice_vectors=lat)


def haldane_model(t1=1.0, t2=0.15, phi=np.pi / 2, mass=0.2, a=2.5):
    """Honeycomb model with chiral next-neighbor hopping; Chern -+1 for
    |mass| < 3*sqrt(3)*t2*|sin(phi)|, trivial otherwise."""
    terms = [((0, 0, 0), 0, 0, mass), ((0, 0, 0), 1, 1, -mass)]
    for R in [(0, 0, 0), (1, 0, 0), (0, 1, 0)]:
        Rm = tuple(-np.array(R))
        terms += [(R, 0, 1, t1), (Rm, 1, 0, t1)]
    for R in [(1, 0, 0), (-1, 1, 0), (0, -1, 0)]:
        Rm = tuple(-np.array(R))
        terms += [(R, 0, 0, t2 * np.exp(1j * phi)),
                  (Rm, 0, 0, t2 * np.exp(-1j * phi)),
                  (R, 1, 1, t2 * np.exp(-1j * phi)),
                  (Rm, 1, 1, t2 * np.exp(1j * phi))]
    return assemble_wannier(2, terms, a)


def threeband_model(a=2.5, t=2.3, tsplit=0.5, e_v=-3.0, e_c1=3.0, e_c2=3.15):
    """One valence band coupled to a split conduction pair; direct gaps at K
    are 5.7 and 6.45 eV, with full circular dichroism at the valleys."""
    terms = [((0, 0, 0), 0, 0, e_v),
             ((0, 0, 0), 1, 1, e_c1),
             ((0, 0, 0), 2, 2, e_c2)]
    for R in [(0, 0, 0), (1, 0, 0), (0, 1, 0)]:
        Rm = tuple(-np.array(R))
        terms += [(R, 0, 1, t), (Rm, 1, 0, t),
                  (R, 0, 2, tsplit * t), (Rm, 2, 0, tsplit * t)]
    for R in [(1, 0, 0), (0, 1, 0), (1, -1, 0)]:
        Rm = tuple(-np.array(R))
        for band, amp in ((1, 0.10), (2, -0.10)):
            terms += [(R, band, band, amp), (Rm, band, band, amp)]
    return assemble_wannier(3, terms, a)


def spin_degenerate_model(a=2.5):
    """Two identical decoupled copies of a trivial band; every k is doubly
    degenerate."""
    terms = []
    for band in (0, 1):
        terms.append(((0, 0, 0), band, band, 1.0))
        for R in [(1, 0, 0), (0, 1, 0)]:
            Rm = tuple(-np.array(R))
            terms += [(R, band, band, 0.3), (Rm, band, band, 0.3)]
    return assemble_wannier(2, terms, a)


@pytest.fixture(scope="session")
def hbn():
    return vs.hexagonal_bn()


@pytest.fixture(scope="session")
def grid24(hbn):
    return vs.KGrid.build(hbn.lattice, 24, 24)


@pytest.fixture(scope="session")
def grid48(hbn):
    return vs.KGrid.build(hbn.lattice, 48, 48)


@pytest.fixture(scope="session")
def berry48(hbn, grid48):
    from valleysim.observables import berry_curvature
    return berry_curvature(hbn, grid48)
