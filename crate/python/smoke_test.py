"""Smoke test for the epmodes Python module.

Build and install first, for example:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/epmodes-*.whl
"""

import math
import os
import tempfile

import epmodes


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    plus, minus = epmodes.two_level_modes(1.0, g=1.0, gamma=2.0)
    assert len(plus) == 2 and plus.provenance == "two_level"
    assert close(abs(plus.rigidity()), 0.924, 5e-4)
    assert close(plus.petermann(), 1.171, 1e-3)

    ep, _ = epmodes.two_level_modes(0.0, g=1.0, gamma=2.0)
    assert math.isinf(ep.petermann())

    d = plus.diagnostics(alphas=[1.0, 2.0])
    assert close(d["rigidity_abs"], d["r2"], 1e-12)
    assert close(d["petermann"] * d["r2"] ** 2, 1.0, 1e-10)
    assert [a for a, _ in d["renyi"]] == [1.0, 2.0]

    n = 720
    uniform = [1.0 / n] * n
    assert close(epmodes.shannon(uniform), math.log(n), 1e-12)
    assert close(epmodes.chi_squared(uniform), 0.0, 1e-12)
    assert close(epmodes.renyi(uniform, 2.0), math.log(n), 1e-12)
    r, _ = epmodes.resultant([0.0, math.pi], [1.0, 1.0], 2)
    assert close(r, 1.0, 1e-12)
    assert epmodes.petermann(0.5) == 4.0

    modes = epmodes.solve_cavity(0.0, k_target=2.4, m=1, h=0.04)
    k = modes[0].eigenvalue
    assert close(k.real, 2.404825557695773, 0.01 * 2.404825557695773) and abs(k.imag) < 1e-8
    assert len(modes[0].coords) == len(modes[0])

    open_modes = epmodes.solve_cavity(0.2, k_target=4.0, m=1, h=0.05, cap_strength=0.8)
    assert open_modes[0].eigenvalue.imag < 0.0
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.epmode")
        open_modes[0].save(path, 0.2)
        param, back = epmodes.load_mode(path)
        assert param == 0.2 and back.values == open_modes[0].values

    config = "[model]\ntype = two_level\n[sweep]\ndelta_range = -1:1:0.05\n"
    rows = epmodes.run_sweep(config)
    assert len(rows) == 41 and all(row["error"] is None for row in rows)
    peak = max(rows, key=lambda row: row["modes"][0]["petermann"])
    assert abs(peak["param"]) < 1e-12
    assert epmodes.sweep_csv(config) == epmodes.sweep_csv(config)

    try:
        epmodes.run_sweep("[model]\ntype = two_level\n[analysis]\nn_bins = -3\n")
    except ValueError as e:
        assert "n_bins" in str(e)
    else:
        raise AssertionError("invalid configuration accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
