import numpy as np

from subband_adapt.core import SubbandFrame


def random_bank(rng, n, m):
    h = rng.standard_normal((n, m))
    return h / np.linalg.norm(h, axis=0)


def random_instance(rng, length=12, bands=3, filter_len=5):
    """Dense random U, H, d, s, w for one update."""
    U = rng.standard_normal((length, filter_len))
    h = random_bank(rng, filter_len, bands)
    d = rng.standard_normal(filter_len)
    s = 0.3 * rng.standard_normal(length)
    w = rng.uniform(0.1, 2.0, length)
    return U, h, d, s, w


def frame_of(U, h, d, s):
    return SubbandFrame(U @ h, h.T @ (d - U.T @ s))


def dense_input_matrix(stream, n, length, filter_len):
    """U(n)[k, j] = u(n - j - k), zero before the stream starts."""
    U = np.zeros((length, filter_len))
    for k in range(length):
        for j in range(filter_len):
            idx = n - j - k
            if idx >= 0:
                U[k, j] = stream[idx]
    return U
