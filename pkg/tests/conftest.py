import numpy as np
import pytest

from catnet import CouplingSpec, NetworkSystem, NormalForm
from catnet._kernels import _pykernels

BACKENDS = [_pykernels]
try:
    from catnet._kernels import _ckernels
    BACKENDS.append(_ckernels)
except ImportError:
    _ckernels = None


@pytest.fixture(params=BACKENDS, ids=["python", "compiled"][:len(BACKENDS)])
def backend(request):
    return request.param


def two_cusps(epsilon=0.0, lam12=0.0):
    lam = np.array([[0.0, lam12], [lam12, 0.0]])
    return NetworkSystem((NormalForm.CUSP, NormalForm.CUSP),
                         CouplingSpec(epsilon, lam))


def single(form):
    return NetworkSystem((form,), CouplingSpec(0.0, np.zeros((1, 1))))


def mixed_system(k=4, epsilon=0.2):
    """One of each flavor, chain-coupled."""
    forms = (NormalForm.FOLD, NormalForm.CUSP, NormalForm.ELLIPTIC_UMBILIC,
             NormalForm.BUTTERFLY)[:k]
    lam = np.zeros((k, k))
    for i in range(k - 1):
        lam[i, i + 1] = lam[i + 1, i] = 1.0
    return NetworkSystem(forms, CouplingSpec(epsilon, lam))
