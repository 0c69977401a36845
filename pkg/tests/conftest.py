import numpy as np
import pytest

import koopmangl as kg


@pytest.fixture(scope="session")
def default_dict():
    return kg.default_dictionary()


@pytest.fixture(scope="session")
def benchmark_dataset():
    """Full default benchmark dataset (60 x 600, seed 0)."""
    return kg.generate_dataset(kg.BenchmarkConfig(seed=0))


@pytest.fixture(scope="session")
def small_dataset():
    """Quick dataset for CLI/selection plumbing tests."""
    return kg.generate_dataset(
        kg.BenchmarkConfig(seed=3), n_traj=6, traj_len=150, split=(0.5, 0.25, 0.25)
    )


def planted_system(rng: np.random.Generator, p: int, m: int, n_mem: int, alpha: float):
    """Random stable finite-memory lifted system (A0, B0, kernel).

    A0 is rescaled until the companion realization has spectral radius <= 0.95,
    so planted trajectories stay bounded.
    """
    from koopmangl.augmented import AugmentedRealization, spectral_radius

    kern = kg.gl_weights(alpha, n_mem)
    A0 = rng.standard_normal((p, p))
    B0 = rng.standard_normal((p, m))
    for _ in range(60):
        rho = spectral_radius(
            AugmentedRealization(A_bar=A0, B_bar=B0, weights=kern.weights)
        ).value
        if rho <= 0.95:
            break
        A0 = A0 * min(0.9, 0.9 / rho)
    return A0, B0, kern


def simulate_planted(A0, B0, kern, U, z_init, rng=None):
    """Reference recursion for planted lifted systems (independent of the kernels).

    ``z_init`` seeds z_0..z_{N-1} (rows); returns the full lifted sequence of
    length len(U) + 1 ... the recursion applies from k = N-1 onward, so entries
    before index N are exactly the provided history.
    """
    w = kern.weights
    N = kern.n_mem
    p = A0.shape[0]
    T = len(U)
    Z = np.zeros((T + 1, p))
    Z[: max(N, 1)] = z_init
    for k in range(max(N, 1) - 1, T):
        acc = A0 @ Z[k] + B0 @ U[k]
        for j in range(1, N + 1):
            acc = acc - w[j] * Z[k + 1 - j]
        Z[k + 1] = acc
    return Z
