from .quadrature import QuadResult, integrate_axisymmetric, integrate_spherical  # noqa: F401
from .special import gamma, log_gamma  # noqa: F401
