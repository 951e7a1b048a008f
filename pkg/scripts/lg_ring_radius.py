"""Sample an LG intensity slice through the CLI and locate its ring.

At focus (t_+ = 0) |f_lg^{0,l}|^2 is proportional to rho^(2l) exp(-2 rho^2 / w0^2),
whose maximum sits at rho = w0 sqrt(l / 2).  The script samples the field on
a grid with ``kgbeams sample`` and compares the brightest radius with that value.
"""
import os
import subprocess
import sys
import tempfile

import numpy as np


def ring_radius(l, w0, n=401):
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "lg.csv")
        subprocess.run([sys.executable, "-m", "kgbeams.cli", "sample", "lg",
                        "--params", f"n=0,l={l},w0={w0},E=4", "--grid", f"x=0:4:{n}",
                        "--y", "0", "--t", "0", "--z", "0", "--out", out], check=True)
        rows = np.loadtxt(out, delimiter=",", skiprows=2)
    intensity = rows[:, 4] ** 2 + rows[:, 5] ** 2
    return rows[np.argmax(intensity), 1]


def main():
    for l in range(1, 6):
        for w0 in (0.8, 1.5):
            got = ring_radius(l, w0)
            want = w0 * np.sqrt(l / 2)
            print(f"l={l} w0={w0}: sampled peak rho={got:.3f}, expected {want:.3f}")


if __name__ == "__main__":
    main()
