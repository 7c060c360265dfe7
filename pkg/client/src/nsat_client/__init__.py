"""Scripting client for the nsat simulator.

Composes run directories, shells out to the `nsat` CLI, parses the
output files, and draws figures.  The client never imports the simulator
package: the CLI plus the documented file formats are its whole contract.
"""

from .builder import NetworkBuilder, ClientValidationError
from .runner import run_core, run_and_load, load_run, RunResult, CoreRunError
from .formats import read_events, write_events, ClientFormatError
from .plots import plot

__all__ = [
    "NetworkBuilder", "ClientValidationError", "run_core", "run_and_load",
    "load_run", "RunResult", "CoreRunError", "read_events", "write_events",
    "ClientFormatError", "plot",
]
