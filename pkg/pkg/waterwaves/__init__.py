from pkg.waterwaves.dno import DnoConfig, G0, G1, G2, P_multiplier, dno_apply, w_velocity
from pkg.waterwaves.evolution import SurfaceState, hamiltonian, integrate_ww, rhs
from pkg.waterwaves.diagnostics import energy_norm, error_norm, hyperbolicity
from pkg.waterwaves.residual import residual_evaluator
