"""Dynamics and entanglement of a two-photon atom in a non-uniform cavity
with a dynamical Stark shift: semiclassical integration, closed-form
elliptic/Weierstrass solutions, chaos diagnostics and atomic purity."""

__version__ = "0.1.0"

from .semiclassical import (ModelParams, SemiclassicalState, Trajectory,
                            integrate, invariant_R2,
                            invariant_R2_generalized, invariant_W,
                            invariant_energy_small_dss, rhs_fast_subsystem,
                            rhs_full, rhs_strong)
from .specfun import (EllipticTriple, WeierstrassCoeffs, complete_elliptic_k,
                      cosine_integral, depressed_cubic_roots, error_function,
                      jacobi_elliptic, weierstrass_p)
from .analytic import (Branch, ResonantSolutionParams,
                       SwitchingSolutionParams, bifurcation_time,
                       composed_inversion, effective_hamiltonian,
                       kappa_resonant, period_resonant, poincare_index,
                       singularity_time, sz_nonresonant,
                       sz_nonresonant_general, sz_resonant, u_resonant,
                       v_resonant, weierstrass_coeffs_nonresonant,
                       x_adiabatic)
from .chaos import (SmallDssParams, SpectrumEstimate, autocorrelation,
                    chaos_verdict, compute_spectrum, correlation_time,
                    evolve_small_dss, pendulum_energy, pendulum_rhs,
                    propagator_matrix, separatrix_solution,
                    stochastic_layer_width)
from .quantum import (HybridResult, PurityCurve, QuantumAmplitudes,
                      ReducedDensityMatrix, Regime, amplitude_rhs,
                      amplitudes_adiabatic, amplitudes_adiabatic_ensemble,
                      amplitudes_weak_resonant, coherent_weights,
                      default_n_max, density_resonant_closed, density_weak,
                      gaussian_phase_average_mc, hybrid_evolve,
                      hybrid_mean_u, purity, purity_adiabatic_space_time_average,
                      purity_adiabatic_time_average, purity_closed_adiabatic,
                      purity_weak, q_chaotic_mean, q_regular, reduced_density)
