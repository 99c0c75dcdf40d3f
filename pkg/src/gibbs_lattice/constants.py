"""Conventions fixed by enumeration and consumed by the test-suite.

The relation between the double random current and Ising correlations has
three plausible readings. ``verify.check_double_current_identity`` evaluates
all three on small graphs; the one that survives is recorded here so the
acceptance tests assert it rather than re-deciding it.
"""

#: <s_a s_b> = P2[a <-> b]
DCISGR_LINEAR = "linear"
#: <s_a s_b> = P2[a <-> b]^2
DCISGR_CONNECTION_SQUARED = "connection_squared"
#: <s_a s_b>^2 = P2[a <-> b]
DCISGR_ISING_SQUARED = "ising_squared"

DCISGR_CANDIDATES = (DCISGR_LINEAR, DCISGR_CONNECTION_SQUARED, DCISGR_ISING_SQUARED)

#: Resolved by exhaustive enumeration on the single edge and the 4-cycle.
DCISGR_CONVENTION = DCISGR_ISING_SQUARED

#: Tolerance used when deciding which convention holds.
DCISGR_TOLERANCE = 1e-10
