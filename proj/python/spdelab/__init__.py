"""Stochastic heat equation small-ball laboratory (python surface)."""

try:
    from . import _core  # packaged layout
except ImportError:  # build-tree layout: module sits next to the package
    import _core

__version__ = _core.__version__

kernel_neumann = _core.kernel_neumann
she_variance = _core.she_variance
brownian_oracle = _core.brownian_oracle
simulate = _core.simulate
small_ball = _core.small_ball
fit_exponent = _core.fit_exponent
validate_config_text = _core.validate_config_text
ConfigError = _core.ConfigError
NumericalError = _core.NumericalError

__all__ = [
    "__version__",
    "kernel_neumann",
    "she_variance",
    "brownian_oracle",
    "simulate",
    "small_ball",
    "fit_exponent",
    "validate_config_text",
    "ConfigError",
    "NumericalError",
]
