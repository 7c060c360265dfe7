"""Event and spike file format.

Versioned binary layout, fixed little-endian:

    bytes 0..7   magic b"NSATEVT1"
    bytes 8..15  u64 record count
    then count records of 12 bytes: tick u32, core u16, neuron u32, delay u16

The same format carries external input events (neuron = external entry
id, delivery at tick + delay) and recorded spikes (neuron = the spiking
neuron, delay 0).  Ticks must be non-decreasing.
"""

import numpy as np

MAGIC = b"NSATEVT1"

EVENT_DTYPE = np.dtype([("tick", "<u4"), ("core", "<u2"), ("neuron", "<u4"), ("delay", "<u2")])


class EventFileError(ValueError):
    pass


def write_events(path, records):
    """Write records ((tick, core, neuron, delay) tuples or a structured
    array) after checking tick monotonicity."""
    arr = np.asarray(records, dtype=EVENT_DTYPE) if not isinstance(records, np.ndarray) else records
    if arr.dtype != EVENT_DTYPE:
        arr = arr.astype(EVENT_DTYPE)
    ticks = arr["tick"]
    if len(ticks) > 1:
        bad = np.nonzero(ticks[1:] < ticks[:-1])[0]
        if len(bad):
            raise EventFileError(f"record {int(bad[0]) + 1}: tick regression on write")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(len(arr)).tobytes())
        fh.write(arr.tobytes())


def read_events(path):
    """Read and validate an event file; errors name the record index."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:8] != MAGIC:
            raise EventFileError(f"{path}: not an event file (bad magic)")
        count = int(np.frombuffer(head[8:], dtype="<u8")[0])
        body = fh.read()
    nbytes = count * EVENT_DTYPE.itemsize
    if len(body) != nbytes:
        got = len(body) // EVENT_DTYPE.itemsize
        raise EventFileError(
            f"{path}: truncated or corrupted at record {got} (header says {count} records)"
        )
    arr = np.frombuffer(body, dtype=EVENT_DTYPE).copy()
    ticks = arr["tick"]
    if len(ticks) > 1:
        bad = np.nonzero(ticks[1:] < ticks[:-1])[0]
        if len(bad):
            raise EventFileError(f"{path}: tick regression at record {int(bad[0]) + 1}")
    return arr


def records_as_tuples(arr):
    return [(int(r["tick"]), int(r["core"]), int(r["neuron"]), int(r["delay"])) for r in arr]
