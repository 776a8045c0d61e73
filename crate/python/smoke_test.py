"""Smoke test for the pyphotonic extension module.

Build and run from the workspace root:

    cargo build -p photonic-ising-py --release
    cp target/release/libpyphotonic.so python/pyphotonic.so
    python3 python/smoke_test.py
"""

import itertools
import sys

import pyphotonic as pp


def energy(j, s):
    n = len(s)
    return -sum(j[a][b] * s[a] * s[b] for a in range(n) for b in range(a + 1, n))


def main():
    j = pp.mobius_ladder(8)
    assert len(j) == 8 and all(j[i][i] == 0 for i in range(8))

    best = min(energy(j, s) for s in itertools.product((1, -1), repeat=8))
    state, h = pp.brute_force_ground(j)
    assert abs(h - best) < 1e-12, (h, best)
    assert abs(pp.hamiltonian(j, state) - best) < 1e-12

    t = pp.spectral_transform(j)
    for a in range(8):
        for b in range(8):
            # A^T A without conjugation reproduces J
            v = sum(complex(t.a_real[k][a], t.a_imag[k][a]) * complex(t.a_real[k][b], t.a_imag[k][b]) for k in range(len(t.eigenvalues)))
            assert abs(v - j[a][b]) < 1e-9, (a, b, v)

    sol = pp.solve(j, n_step=40, n_temp=10, eta=0.8, runs=32, seed=1)
    assert sol.reference_exact and abs(sol.reference_h - best) < 1e-12
    assert abs(sol.best_h - best) < 1e-12
    assert 0.0 <= sol.probability[-1] <= 1.0 and len(sol.probability) == 400

    noisy = pp.solve(j, n_step=20, n_temp=5, eta=0.8, runs=8, seed=1, tier="noisy")
    assert noisy.exposure > 0 and noisy.t0 > sol.t0

    report = pp.noise_report(20, 3e5, -26.0, 2.0)
    assert report["resolvable"] and report["snr_db"] > 0

    try:
        pp.brute_force_ground(pp.random_glass(30, 0))
    except OverflowError:
        pass
    else:
        raise AssertionError("enumeration above the cap should fail")

    try:
        pp.hamiltonian(j, [1, 2, 1, 1, 1, 1, 1, 1])
    except ValueError:
        pass
    else:
        raise AssertionError("spin values other than +-1 should fail")

    print("pyphotonic smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
