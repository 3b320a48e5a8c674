"""framewalk: structure-preserving simulation of orthonormal-frame gradient flow.

Fourier pseudospectral discretization of a frame elasticity gradient flow
on SO(3)-valued fields, time-stepped by a rotational discrete-gradient
scheme that keeps every node frame exactly orthonormal and dissipates the
elastic energy unconditionally.
"""

from .dgrad import (beta_mid, biaxial_discrete_gradient,
                    gonzalez_discrete_gradient)
from .elastic import (ElasticCoefficients, EnergyParts,
                      FrankTensorCoefficients, ReducedCoefficients,
                      continuous_variation, energy_original_form,
                      frank_tensor_energy, kijkl_to_frank,
                      oseen_frank_energy, reduce_coefficients, total_energy)
from .frames import (EulerAngles, FrameField, TangentBasis, frame_from_euler,
                     initial_profile, orthonormality_error, random_frame,
                     tangent_basis)
from .grid import SpectralGrid
from .integrator import (AdaptiveSettings, HistoryRecord, NonconvergenceError,
                         SolverSettings, StepState, adaptive_dt,
                         assemble_A_mid, cayley_update, grdg_step, jfnk_solve,
                         run_simulation)
from .kernels import BACKEND as kernel_backend
from .manufactured import (convergence_sweep, forcing_term,
                           manufactured_frame, manufactured_rate)

__version__ = "0.1.0"
