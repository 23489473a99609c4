"""Current-regulated induction machine drive simulator with a ramp-comparison PWM inverter."""

from imdrive.params import (
    BaseSet,
    MachineParams,
    ParameterError,
    PhasorSolution,
    derive_bases,
    from_per_unit,
    steady_state_circuit,
    to_per_unit,
)

__all__ = [
    "BaseSet",
    "MachineParams",
    "ParameterError",
    "PhasorSolution",
    "derive_bases",
    "from_per_unit",
    "steady_state_circuit",
    "to_per_unit",
]

__version__ = "0.1.0"
