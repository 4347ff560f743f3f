import json

from ._vgpqmc import *  # noqa: F401,F403
from ._vgpqmc import load_hamiltonian as _load_text


def load_hamiltonian(document, tol_herm=1e-10, tol_zero=1e-12):
    """Read a Hamiltonian from a JSON string or an already parsed dict."""
    if not isinstance(document, str):
        document = json.dumps(document)
    return _load_text(document, tol_herm, tol_zero)
