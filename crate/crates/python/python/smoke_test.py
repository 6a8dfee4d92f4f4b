"""Smoke test for the helmholtz_py extension module."""

import math
import sys

import helmholtz_py as hp


def main():
    assert "fig1_1d_pollution" in hp.preset_names()
    assert "Example 5.3" in hp.list_presets()

    assert abs(hp.bessel_j(0.0, 0.0) - 1.0) < 1e-15
    assert abs(hp.bessel_j(0.5, 1.0) - math.sqrt(2.0 / math.pi) * math.sin(1.0)) < 1e-13

    coarse = hp.solve_1d(10.0, 2, 20)
    fine = hp.solve_1d(10.0, 2, 40)
    rate = math.log2(coarse["err_h1semi_rel"] / fine["err_h1semi_rel"])
    assert abs(rate - 2.0) < 0.2, rate

    csv = hp.run_config("preset = nodal_exact_1d\nn_elements = 20, 40\n")
    lines = csv.splitlines()
    assert lines[0] == hp.CSV_HEADER
    assert len(lines) == 3
    nodal = float(lines[1].split(",")[14])
    assert nodal < 1e-8, nodal

    try:
        hp.run_config("method = fem\ndomain = interval\nk =\nn_elements = 4\n")
    except ValueError as e:
        assert "`k`" in str(e)
    else:
        raise AssertionError("empty k accepted")

    dump = hp.mesh_dump("lshape", 0.5, sigma=0.125, layers=2)
    assert dump.split()[0] == "2"

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
