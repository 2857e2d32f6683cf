"""Regenerate the JSON fixtures shipped in ``src/semicausal/data``.

Run from the repository root: ``python demos/build_fixtures.py``.
"""

from pathlib import Path

import numpy as np

from semicausal.choi import sandwich
from semicausal.matrixfile import from_matrix, from_superop
from semicausal.quantum_semicausal import two_atom_example
from semicausal.tensor_linalg import flip

DATA = Path(__file__).resolve().parents[1] / "src" / "semicausal" / "data"


def main() -> None:
    DATA.mkdir(exist_ok=True)
    gkls, L_s = two_atom_example()
    from_superop(gkls.heisenberg(), 2, 2, "heisenberg").write(DATA / "two_atom.json")
    from_superop(L_s, 2, 2, "schrodinger").write(DATA / "two_atom_schrodinger.json")

    # i[F, .] with the swap F: signals both ways
    F = flip(2, 2)
    swap_gen = 1j * (sandwich(F, np.eye(4)) - sandwich(np.eye(4), F))
    from_superop(swap_gen, 2, 2, "heisenberg").write(DATA / "swap_hamiltonian.json")
    from_superop(np.zeros((16, 16)), 2, 2, "heisenberg").write(DATA / "zero_generator.json")

    rho = np.zeros((4, 4))
    rho[2, 2] = 1.0                                              # A excited, B ground
    from_matrix(rho, {"d_A": 2, "d_B": 2}, meta={"role": "state"}).write(DATA / "two_atom_initial.json")
    for p in sorted(DATA.glob("*.json")):
        print(p.relative_to(DATA.parents[2]))


if __name__ == "__main__":
    main()
