"""valleysim: coherent valley-polarization control in 2D hexagonal materials."""

from .fields import PulseSpec, PulseTrain, two_pulse_delay_for_helicity
from .kgrid import KGrid
from .lattice import (CrystalLattice, Eigensystem, TwoBandModel, WannierModel,
                      band_path, bands_and_dipoles, dipole_matrix_at,
                      eigensystem_at, hamiltonian_at, hexagonal_bn)
from .observables import BerryMap, ValleyAsymmetry, berry_curvature, valley_asymmetry, vhc
from .propagator import PropagationConfig, PropagationResult, initialize_ground_state, propagate
from .scans import DelayScan, SwitchResult, T2FitResult, fit_t2, scan_delay, switch_protocol

__version__ = "0.1.0"
