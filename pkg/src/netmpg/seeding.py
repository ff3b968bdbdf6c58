"""Named, independent random substreams derived from one master seed."""

import zlib

import numpy as np


def substream(seed, name):
    """Generator for stream ``name`` of master ``seed``.

    Streams are keyed by a CRC of the name, so adding a new stream never
    shifts the draws of existing ones.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(key,))))
