"""A polarization-dependent filter whose surroundings age it over time.

A photon (vacuum, H, V) is prepared, leaks through a noisy stage before the
filter and another after it. The filter itself is a fixed channel; the
surroundings act as a continuous family of superchannels on it.

Run: ``python3 demos/aging_board.py``
"""

from semicausal.cli import format_rows
from semicausal.scenarios import aging_board


def main() -> None:
    times = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
    rows = aging_board(times)
    print(format_rows("aging-board", rows))
    detect = [r.value for r in rows if r.quantity.endswith("detection probability")]
    print("An H photon is detected with probability")
    for t, p in zip(times, detect):
        print(f"  t = {t:4.2f}: {p:.4f}")
    print("The evolved filter stays a channel at every time, so the aging is physical.")


if __name__ == "__main__":
    main()
