"""Classical semicausal maps: Alice acts first and forwards a copy to Bob.

Every stochastic map where Bob's input cannot change Alice's output splits
into Alice's local step followed by Bob reading a copy of her data.

Run: ``python3 demos/classical_copy.py``
"""

import numpy as np

from semicausal.classical_semicausal import (check_classical_semicausal,
                                             random_semicausal_nonneg, semilocalize)
from semicausal.cli import format_rows
from semicausal.scenarios import classical_copy
from semicausal.tensor_linalg import BipartiteSystem


def main() -> None:
    print(format_rows("classical-copy", classical_copy()))
    d = BipartiteSystem(3, 3)
    rng = np.random.default_rng(11)
    n = random_semicausal_nonneg(d, rng, zero_rows=1)
    A, U, dE = semilocalize(n, d)
    ok, _, res = check_classical_semicausal(n, d, "row")
    print(f"A random 9x9 semicausal map (residual {res:.1e}, passes: {ok})")
    print(f"splits through a memory of size {dE}: A is {A.shape}, U is {U.shape}.")
    recon = np.kron(A, np.eye(3)) @ np.kron(np.eye(3), U)
    print(f"Reconstruction error {np.abs(recon - n).max():.1e}.")


if __name__ == "__main__":
    main()
