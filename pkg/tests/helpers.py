import numpy as np

from cwsense.bandplan import bandplan_from_bands
from cwsense.sampling import make_operator, sensing_map

MHz = 1e6
PAPER_BANDS = [
    (30 * MHz, 70 * MHz, "PU1"),
    (120 * MHz, 180 * MHz, "PU2"),
    (300 * MHz, 340 * MHz, "PU3"),
    (420 * MHz, 460 * MHz, "PU4"),
]


def paper_plan():
    return bandplan_from_bands(0.0, 500 * MHz, 500, PAPER_BANDS)


def random_instance(n, m, sparsity, seed, kind="selection"):
    """Noiseless ``(A, y, r_true)`` with a random `sparsity`-sparse complex spectrum."""
    rng = np.random.default_rng(seed)
    r = np.zeros(n, dtype=complex)
    idx = rng.choice(n, sparsity, replace=False)
    r[idx] = rng.standard_normal(sparsity) + 1j * rng.standard_normal(sparsity)
    A = sensing_map(make_operator(kind, m, n, rng), n)
    return A, A.forward(r), r
