"""Environment-controlled size limits."""

import os

DEFAULT_MAX_STATES = 1 << 24
DEFAULT_MAX_BOX = 1 << 22


def max_states() -> int:
    """Cap on the number of configurations the exact engine will enumerate."""
    return int(os.environ.get("GIBBS_LATTICE_MAX_STATES", DEFAULT_MAX_STATES))


def max_box_size() -> int:
    return int(os.environ.get("GIBBS_LATTICE_MAX_BOX", DEFAULT_MAX_BOX))
