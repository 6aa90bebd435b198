"""Quantum accelerator modes of the gravity-kicked rotor near higher-order resonances.

Exact Floquet evolution of beta-rotors, spinor band analysis of resonant
propagators (Berry phases and geometric potentials), epsilon-classical maps
with periodic-orbit search, and arithmetic spectroscopy of the mode hierarchy.
"""

from .params import SystemParams, build_params
from .errors import (
    QamError,
    ConfigError,
    NumericsError,
    UnderResolvedError,
    GaugeFixingError,
    OrbitNotFoundError,
    GridMismatchError,
)
from .rotor import RotorState, plane_wave, floquet_step, evolve, gauge_shift, KickRecorder
from .ensemble import Ensemble, sample_gaussian_ensemble
from .observables import MomentumHistogram, momentum_distribution, box_probability
from .husimi import husimi
from .spinor import (
    SpinorField,
    SpinPropagator,
    apply_momentum,
    apply_propagator,
    decompose,
    field_mean_momentum,
    propagator_matrices,
    recompose,
    site_hop_matrix,
    spin_propagator,
    theta_grid,
)
from .bands import (
    BandData,
    GeometricData,
    band_populations,
    band_structure,
    geometric_potentials,
    omega_derivative,
)
from . import q2
from .packets import band_packet
from .pseudoclassical import (
    MapParams,
    OrbitAcceleration,
    PeriodicOrbit,
    torus_map_step,
    torus_map_back,
    accelerated_map_step,
    find_periodic_orbit,
    find_periodic_orbits,
    orbit_acceleration,
    phase_portrait,
    wrap_angle,
)
from .spectroscopy import (
    CFExpansion,
    Ratio,
    ResonanceRecord,
    omega_star,
    omega_bare,
    continued_fraction,
    convergents,
    farey_mediant,
    special_beta,
    mode_curves,
    resonance_visibility,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
