"""fqcover: exact harmonic analysis and coverage experiments over finite fields.

The library builds fully tabulated fields GF(p^n), runs the Fourier
transform on F_q^d, counts dot-product incidences exactly, and checks a
family of coverage statements for sum-of-product sets, all at desk scale
with integer arithmetic wherever a theorem is being tested.
"""

__version__ = "0.1.0"

from .gf import Field, make_field, multiplicative_generator  # noqa: F401
from .fourier import (  # noqa: F401
    SpectralFn,
    convolve_diff,
    dot,
    fourier_forward,
    fourier_forward_direct,
    fourier_invert,
    plancherel_check,
)
from .incidence import (  # noqa: F401
    NuProfile,
    PointSet,
    hyperplane_hat_identity_check,
    hyperplane_sum,
    line_intersection,
    max_line_intersection,
    nu,
    nu_bruteforce,
    nu_spectral,
    remainder_bound_check,
    rotating_planes_apply,
    second_moment_check,
)
from .covering import (  # noqa: F401
    CoverageVerdict,
    ScalarSet,
    bilinear_cover,
    covers_units,
    d_for_epsilon,
    dot_product_set,
    dot_set_lower_bound,
    iterated_sumset,
    point_cover_threshold,
    positive_proportion_check,
    product_set,
    scalar_cover_threshold,
    sumset_of_products,
)
