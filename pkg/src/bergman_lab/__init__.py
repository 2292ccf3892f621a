"""Numerics for Bergman densities and Fubini-Study maps on the polarised
line, plus the seeded experiments that measure the injectivity ratio."""

__version__ = "0.1.0"

from .errors import (BasisMismatchError, BergmanLabError, CapacityError,
                     ConfigError, DegenerateMetricError,
                     InjectivityViolationError, KTooSmallError,
                     NonPositiveFormError)
from .geometry import (ChartPoint, MetricJet, MetricPotential, QuadratureGrid,
                       RunDescriptor, build_grid, metric_jet)
from .sections import SectionBasis, SectionFrame, eval_frame, monomial_basis
from .hermitian import (DeltaMatrix, HermitianForm, delta_from, hilb_gram,
                        hs_norm, orthonormalize, sample_pair, trace_split)
from .fsmap import (BergmanJet, FsContext, InducedMetricJet, ScalarFieldJet,
                    bergman_jet, f_jet, fs_weight, induced_metric_jet,
                    make_context, reference_change, w22_norm)
from .ambient import (SffSample, XiDecomposition, ambient_hamiltonian,
                      dbar_tangent_norm, sff_lambda, xi_decompose)
from .experiments import (ExperimentConfig, k_sweep_bergman, ratio_experiment,
                          validate)
