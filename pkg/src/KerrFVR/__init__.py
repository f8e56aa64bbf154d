from .color_scheme import ColorScheme
from .config import DisplayConfig, QuadratureSpec, RunConfig, TimeValue
from .diagnostics import ComparisonReport, compare, normalization, post_normalize
from .fvr_propagator import (ChordMapResult, backward_chord_map, caustic_det_map, fvr_field, fvr_wigner,
                             liouville_field)
from .kerr_dynamics import Dynamics
from .phase_space import Chord, Field, Grid2D, PhasePoint
from .quantum_oracle import evolve, wigner_of_state
from .states import StateSpec, fock_coefficients
from .viewer import FieldViewer

__all__ = ['ColorScheme', 'DisplayConfig', 'QuadratureSpec', 'RunConfig', 'TimeValue',
           'ComparisonReport', 'compare', 'normalization', 'post_normalize',
           'ChordMapResult', 'backward_chord_map', 'caustic_det_map', 'fvr_field', 'fvr_wigner',
           'liouville_field', 'Dynamics', 'Chord', 'Field', 'Grid2D', 'PhasePoint',
           'evolve', 'wigner_of_state', 'StateSpec', 'fock_coefficients', 'FieldViewer']
