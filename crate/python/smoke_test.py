"""Smoke test for the minfact_py extension module."""

import json
import math

import minfact_py as mf


def main():
    assert len(mf.enumerate(4)) == 25
    assert len(mf.enumerate(4, [2, 2, 2])) == 16

    f = mf.Factorization(8, [[5, 6, 7, 8], [2, 3], [1, 2, 5], [4, 5]])
    assert f.is_minimal() and f.k() == 4 and f.largest_cycle() == 4
    assert mf.Factorization.from_tree_json(f.tree_json()) == f
    assert mf.Factorization.from_json(f.to_json()) == f
    assert f.svg().count("<polygon") == 4

    s, nu0, sigma2 = mf.critical("uniform")
    assert abs(nu0 - (3 - math.sqrt(5)) / 2) < 1e-10
    assert abs(sigma2 - (math.sqrt(5) - 1)) < 1e-9
    assert abs(mf.p_nu("delta:3") - 0.5) < 1e-12

    g = mf.sample(500, "uniform", 11)
    assert g.n == 500 and g.is_minimal()
    assert g == mf.sample(500, "uniform", 11)

    rep = json.loads(mf.estimate("cycle_count", "delta:3", 1001, 20, 1))
    assert rep["verdict"] == "pass", rep
    assert mf.counting_suite(5)
    print("smoke test passed")


if __name__ == "__main__":
    main()
