"""gkdvlab - pseudospectral simulator and Monte Carlo laboratory for the stochastic generalized KdV equation"""

__version__ = "0.1.0"

from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)
