"""Fixed-point, multiplier-less spiking network simulator.

Neuron state updates use only shifts, adds and saturation on 16-bit
words; synaptic weights are 8-bit and learn through an event-driven,
modulated, forward-table STDP rule.  Cores advance in lockstep and
exchange nothing but spike addresses, so runs replay bit-identically
from (config, seeds, external events) on any thread count.
"""

from .params import (
    ConfigError, ParamGroup, LearningGroup, Synapse, Axon, CoreSpec,
    MonitorSpec, LearningGate, SimulationConfig,
)
from .engine.fabric import Fabric, RunResult, SPIKE_DTYPE

__all__ = [
    "ConfigError", "ParamGroup", "LearningGroup", "Synapse", "Axon", "CoreSpec",
    "MonitorSpec", "LearningGate", "SimulationConfig", "Fabric", "RunResult",
    "SPIKE_DTYPE",
]

__version__ = "0.1.0"
