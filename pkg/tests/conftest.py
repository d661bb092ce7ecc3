import numpy as np
import pytest

from ddyson import (
    ExpSumFactor,
    HamiltonianModel,
    PermutationMap,
    PermutationTerm,
)


@pytest.fixture
def free_model():
    """Factory: H = diag(energies) with an identically-zero perturbation."""
    def make(energies):
        energies = np.asarray(energies, dtype=float)
        dim = energies.size
        term = PermutationTerm(
            perm=PermutationMap.identity(dim),
            factors=(ExpSumFactor(lam=np.zeros(dim, dtype=complex),
                                  d=np.zeros(dim, dtype=complex)),),
        )
        return HamiltonianModel(energies=energies, terms=(term,))
    return make


def quartic_block(dim: int) -> np.ndarray:
    """(a + a^dag)^4 restricted to the lowest ``dim`` Fock states.

    Built in a padded space so products through intermediate levels above
    the cut are kept, then cropped: the honest restriction of the infinite
    operator.
    """
    pad = dim + 4
    lower = np.diag(np.sqrt(np.arange(1, pad)), 1)
    x4 = np.linalg.matrix_power(lower + lower.T, 4)
    return x4[:dim, :dim].astype(complex)
