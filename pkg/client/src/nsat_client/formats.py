"""Standalone readers/writers for the simulator's file formats.

The client deliberately does not import the simulator package: it talks
to the core binary through its documented external surfaces only.  The
layouts mirrored here:

* config YAML (schema version 1), dumped with sorted keys so composed
  files are byte-stable;
* synapse sidecar: b"NSATSYN1", u64 count, records (src u32, dst u32,
  comp u8, w i8, plastic u8), sorted by src;
* event/spike files: b"NSATEVT1", u64 count, records (tick u32,
  core u16, neuron u32, delay u16), little-endian throughout.
"""

import numpy as np
import yaml

EVT_MAGIC = b"NSATEVT1"
SYN_MAGIC = b"NSATSYN1"
EVENT_DTYPE = np.dtype([("tick", "<u4"), ("core", "<u2"), ("neuron", "<u4"), ("delay", "<u2")])
SYN_DTYPE = np.dtype([("src", "<u4"), ("dst", "<u4"), ("comp", "u1"), ("w", "i1"), ("plastic", "u1")])

INLINE_SYNAPSE_LIMIT = 64


class ClientFormatError(ValueError):
    pass


def write_config_doc(doc, path):
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True, default_flow_style=None, width=100)
    return path


def read_config_doc(path):
    with open(path) as fh:
        return yaml.safe_load(fh)


def write_synapses(path, rows):
    arr = np.zeros(len(rows), dtype=SYN_DTYPE)
    for i, r in enumerate(rows):
        arr[i] = (r[0], r[1], r[2], r[3], int(r[4]))
    if len(arr) > 1 and np.any(arr["src"][1:] < arr["src"][:-1]):
        raise ClientFormatError("synapse sidecar must be sorted by source id")
    with open(path, "wb") as fh:
        fh.write(SYN_MAGIC)
        fh.write(np.uint64(len(arr)).tobytes())
        fh.write(arr.tobytes())


def read_events(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:8] != EVT_MAGIC:
            raise ClientFormatError(f"{path}: not an event file")
        count = int(np.frombuffer(head[8:], dtype="<u8")[0])
        body = fh.read()
    if len(body) != count * EVENT_DTYPE.itemsize:
        got = len(body) // EVENT_DTYPE.itemsize
        raise ClientFormatError(
            f"{path}: truncated at record {got}, header promised {count} "
            f"(offset {16 + got * EVENT_DTYPE.itemsize})")
    return np.frombuffer(body, dtype=EVENT_DTYPE).copy()


def write_events(path, records):
    arr = np.asarray(records, dtype=EVENT_DTYPE)
    with open(path, "wb") as fh:
        fh.write(EVT_MAGIC)
        fh.write(np.uint64(len(arr)).tobytes())
        fh.write(arr.tobytes())
