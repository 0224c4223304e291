"""Finite-population mean estimation under non-response.

Hansen-Hurwitz sub-sampling of non-respondents, ratio/regression estimators,
a class of estimators with optimum constants, in single- and two-phase designs.
"""

from .design import (BernoulliPerUnit, Design, DrawnSample, GroupDeterministic,
                     SinglePhase, TwoPhase, draw_srswor, realize)
from .estimators import (ClassParams, EstimationError, class_estimate, class_estimate_2p,
                         hh_mean, ratio_estimate, ratio_estimate_2p, regression_estimate,
                         regression_estimate_2p)
from .population import (FinitePopulation, PopulationError, PopulationParams,
                          compute_params, load_population, synthesize_population)

__version__ = "0.1.0"
