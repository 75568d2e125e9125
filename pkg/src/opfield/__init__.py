"""Compact operators on Hilbert C(T)-modules as fields of matrices over a finite parameter space."""
import os as _os

# OPFIELD_THREADS caps BLAS/OpenMP threads; it must be applied before numpy loads.
if _os.environ.get("OPFIELD_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["OPFIELD_THREADS"])

from .fieldcore import (  # noqa: E402
    ContractError,
    OperatorField,
    ParameterSpace,
    ScalarField,
    VectorField,
    fiber_eval,
    inner_product,
    is_positive,
    module_scale,
    neighbor_jump,
    rank_one,
)
from .schatten import (  # noqa: E402
    OmegaFamily,
    SingularSystem,
    omega_sum,
    phase_align,
    schatten_decompose,
    schatten_decompose_positive,
    singular_value_fields,
    support_indicator,
    truncate_tail,
)
from .traceclass import (  # noqa: E402
    DualFunctional,
    dual_pair,
    functional_to_operator,
    hs_inner,
    lp_norm,
    norming_element,
    trace,
    trace_via_fourier_basis,
)
from .kernelop import (  # noqa: E402
    KernelField,
    L2Basis,
    QuadratureSpace,
    adjoint_kernel,
    integrate_field,
    kernel_apply,
    kernel_to_operator,
    separable_approx,
    tensor_to_module,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "OperatorField",
    "ParameterSpace",
    "ScalarField",
    "VectorField",
    "fiber_eval",
    "inner_product",
    "is_positive",
    "module_scale",
    "neighbor_jump",
    "rank_one",
    "OmegaFamily",
    "SingularSystem",
    "omega_sum",
    "phase_align",
    "schatten_decompose",
    "schatten_decompose_positive",
    "singular_value_fields",
    "support_indicator",
    "truncate_tail",
    "DualFunctional",
    "dual_pair",
    "functional_to_operator",
    "hs_inner",
    "lp_norm",
    "norming_element",
    "trace",
    "trace_via_fourier_basis",
    "KernelField",
    "L2Basis",
    "QuadratureSpace",
    "adjoint_kernel",
    "integrate_field",
    "kernel_apply",
    "kernel_to_operator",
    "separable_approx",
    "tensor_to_module",
]
