"""Robust mean-square stability analysis for linear quantum systems with
non-quadratic Hamiltonian perturbations."""

__version__ = "0.1.0"

from .errors import QstabError  # noqa: E402
from .model import (  # noqa: E402
    DoubledMatrix,
    PerturbationBounds,
    PlantModel,
    SisoRealization,
    build_plant,
    build_realization,
    kerr_plant,
)
from .smallgain import Verdict, check_small_gain, hinf_norm  # noqa: E402
from .popov import check_popov, popov_margin, popov_plot, search_theta  # noqa: E402
from .certificates import (  # noqa: E402
    build_spr_lmi,
    certify,
    check_certificate,
    compute_lambda,
    compute_msq_constants,
    find_P,
)

__all__ = [
    "__version__", "QstabError", "DoubledMatrix", "PerturbationBounds", "PlantModel",
    "SisoRealization", "build_plant", "build_realization", "kerr_plant", "Verdict",
    "check_small_gain", "hinf_norm", "check_popov", "popov_margin", "popov_plot", "search_theta",
    "build_spr_lmi", "certify", "check_certificate", "compute_lambda", "compute_msq_constants",
    "find_P",
]
