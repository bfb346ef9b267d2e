"""Transfer-function realizations and Agler decompositions of matrix rational inner functions on the bidisk."""
import os as _os

# must run before numpy loads its BLAS
_threads = _os.environ.get("BIDISK_REALIZE_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .errors import *  # noqa: E402,F401,F403
from .poly import MatPoly, RationalMatrixFunction, breve, conj_reflect, slice_stability_check  # noqa: E402
from .realize1 import (  # noqa: E402
    TransferRealization,
    degdet,
    realize_contractive_1d,
    realize_isoinner_1d,
    trim,
)
from .specfact import compare_factors, factor_constant_psd, fejer_riesz, right_inverse_constant  # noqa: E402
from .snf import smith_normal_form  # noqa: E402
from .sos2 import CesaroOperator, augment_to_isoinner, quadrature_integral, sos_factor_strict  # noqa: E402
from .kummert import (  # noqa: E402
    KummertCertificate,
    dominant_terms,
    minimal_breakdown,
    realize_contractive_2d_strict,
    realize_isoinner_2d,
)
from .agler import (  # noqa: E402
    AglerDecomposition,
    adjoint_realization,
    decomposition_to_tfr,
    domination_check,
    embed_in_unitary,
    nilpotency_check,
    reflect_decomposition,
    tfr_to_decomposition,
)
from .verify import (  # noqa: E402
    VerificationReport,
    random_inner_generator,
    verify_decomposition_identity,
    verify_isoinner,
    verify_kernel_psd,
    verify_realization,
)
from .fixtures import kummert_example  # noqa: E402

__version__ = "0.1.0"
