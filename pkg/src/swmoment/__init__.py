"""
Quaternionic representations, hyperkahler moment maps and the numerical
checks built on them.

Submodules
----------
quat_core        quaternions and compact Lie algebras
representation   quaternionic representations, moment maps, Gamma_phi
identity_suite   randomised checks of the pointwise identities
certifier        multistart certificates of compactness constants
frequency_lab    lattice fields, residuals, frequency function, covering
cli              ``swmoment`` command line
"""

from . import certifier, frequency_lab, identity_suite, quat_core, representation

__version__ = "0.1.0"

__all__ = ["quat_core", "representation", "identity_suite", "certifier", "frequency_lab", "__version__"]
