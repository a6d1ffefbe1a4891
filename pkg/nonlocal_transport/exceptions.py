"""Error hierarchy shared by every nonlocal_transport module."""


class TransportError(Exception):
	"""Base class for all nonlocal_transport errors"""


class ConfigurationError(TransportError):
	"""Experiment configuration could not be parsed or validated"""

	def __init__(self, message, errors=None):
		super().__init__(message)
		self.errors = list(errors or [])


class GridError(TransportError, ValueError):
	"""Invalid torus grid geometry"""


class ParameterError(TransportError, ValueError):
	"""Model or numerical parameter outside its admissible range"""


class MultiplierError(TransportError, ValueError):
	"""Fourier multiplier produced non-finite values at an active mode"""


class QuadratureDivergenceError(TransportError):
	"""Image-shell contributions of a lattice quadrature stopped decreasing"""

	def __init__(self, message, shell_contributions=None):
		super().__init__(message)
		self.shell_contributions = list(shell_contributions or [])


class BlowUpSuspected(TransportError):
	"""Raised by a single step when the solution left the resolved regime"""

	def __init__(self, message, t=None, grad_sup=None):
		super().__init__(message)
		self.t = t
		self.grad_sup = grad_sup


class OracleBudgetExceeded(TransportError):
	"""Reference oracle invoked on a grid larger than its budget"""


class ProfileError(TransportError, ValueError):
	"""Radial profile is malformed or not smooth at the origin"""


class AsymmetryError(TransportError, ValueError):
	"""Field failed the radial symmetry gate"""


class ArtifactError(TransportError):
	"""Output artifact is unreadable or has an unexpected layout"""


class UnderResolutionWarning(UserWarning):
	"""Computed quantity shows signs of spectral under-resolution"""
