"""Open-system thermodynamics of an entangled qubit pair coupled to two local baths."""
from .dynamics import BathSpec, Setup, analytic_state, numerical_lindblad, setup_params, setup_triple
from .errors import ConfigError, DomainError, PairThermoError, UsageError, ValidationError
from .protocol import run_protocol
from .qstate import DensityMatrix, HamiltonianOperator, concurrence, partial_trace, singlet_state, system_hamiltonian
from .thermo import ergotropy, first_law_ledger, gap_report, internal_energy, passive_state

__version__ = "0.1.0"
