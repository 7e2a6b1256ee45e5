"""Numerical laboratory for contact forms with first-order singularities.

Modules:

* ``charts``        coordinate charts, scalar/vector fields with exact gradients
* ``bforms``        decomposed singular 1-/2-forms, contact tests, on-Z data
* ``reeb``          Reeb solves and Hamiltonian fields
* ``flow``          adaptive Dormand-Prince integration with proximity stops
* ``orbits``        orbit taxonomy classifier, critical points, separatrices
* ``constructions`` the catalog of explicit forms, fields, and perturbations
* ``cli``           named experiments and the verification suite (``srl ...``)
"""

from .bforms import (BForm1, BForm2, BManifoldChart, ContactReport,
                     SamplingPlan, contact_volume_coefficient,
                     exceptional_data, exterior_derivative, grid_plan,
                     is_b_contact, near_z_plan, pair_1form, smooth_chart)
from .charts import (CYL3, LINE, PLANE, R3, R4, TORUS2, Chart, Point,
                     ScalarField, SmoothMap, VectorField, change_chart,
                     const_field, coordinate_field, eval_with_gradient,
                     identity_map, linear_map, pushforward,
                     register_conversion)
from .errors import (ConfigError, DegeneracyError, DegenerateContactError,
                     DegenerateSymplecticError, DimensionError, DomainError,
                     EpsilonTooLargeError, GluingError, NotOnCriticalSetError,
                     SingularPairingError, SrlError)
from .flow import (IntegratorOptions, Section, Termination, Trajectory,
                   first_integral_drift, integrate, section_crossings)
from .orbits import (ClassifierOptions, CriticalPointOnZ, LimitKind, LimitSet,
                     OrbitClassification, OrbitKind, classify_orbit,
                     detect_periodic, find_critical_points_on_z,
                     limit_set_estimate, trace_separatrices)
from .reeb import (BSymplectic4, ReebSolveDiagnostics, hamiltonian_field,
                   hamiltonian_vector_field, induced_reeb_on_level,
                   liouville_contract, reeb_at, reeb_on_z)

__version__ = "0.1.0"
