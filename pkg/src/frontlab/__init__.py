"""frontlab: a numerical laboratory for trigger-driven pattern-forming fronts.

Simulates, continues, and measures fronts created by a moving trigger in two
prototype equations (a cubic-quintic complex Ginzburg-Landau equation and a
modified Cahn-Hilliard equation), and tests the prediction that near the free
pushed-front speed the locked-front branch traces a logarithmic spiral in the
(speed, frequency) plane with pitch set by a spatial eigenvalue gap.
"""

__version__ = "0.1.0"

from . import continuation, measure, models, prediction, sim, spectral  # noqa: F401,E402
