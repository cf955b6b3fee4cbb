"""Smoke test for the osnap_py extension module.

Build with `maturin develop` (or copy the built shared library next to this
script as osnap_py.so) and run `python smoke_test.py`.
"""

import math
import os
import random
import sys
import tempfile

import osnap_py as op


def main():
    p = op.recommend_params(6, 0.5, 1 / 3, "tz")
    assert p["m"] == 224 and p["s"] == 1, p

    sk = op.Sketch("osnap-block", m=12, n=30, s=3, seed=7)
    assert sk.shape == (12, 30)
    for j in range(30):
        col = sk.column_nonzeros(j)
        assert len(col) == 3
        assert all(abs(abs(v) - 1 / math.sqrt(3)) < 1e-15 for _, v in col)
        assert [r // 4 for r, _ in col] == [0, 1, 2]

    rng = random.Random(1)
    a = [[rng.gauss(0, 1) for _ in range(2)] for _ in range(30)]
    pa = sk.apply(a)
    triplets = [(i, j, a[i][j]) for i in range(30) for j in range(2)]
    assert pa == sk.apply_sparse(2, triplets)

    state = op.SketchState(sk, 2)
    for i, j, v in triplets:
        state.update(i, j, v)
    assert max(abs(x - y) for r1, r2 in zip(state.sa(), pa) for x, y in zip(r1, r2)) < 1e-12

    h = op.KWiseHash(4, 1000, 16, 3)
    assert all(0 <= h.eval(x) < 16 for x in range(1000))
    assert h.degree == 4

    big = [[rng.gauss(0, 1) for _ in range(3)] for _ in range(400)]
    b = [rng.gauss(0, 1) for _ in range(400)]
    res = op.sketched_regression(big, b, 0.5, seed=2)
    assert len(res["x"]) == 3 and res["residual"] > 0

    scores = op.approx_leverage_scores(big, 0.5, seed=3)
    assert len(scores) == 400 and abs(sum(scores) - 3) < 1.0

    lr = op.low_rank_approx(big, 2, 0.5, seed=4)
    assert len(lr["sigma"]) == 2

    rep = op.frobenius_moment_check(200, 4, 100, 50, 1)
    assert rep["bound"] == 0.2 and rep["passed"] in (True, False)
    assert op.hash_independence_exhaustive(2, 5)["statistic"] == 0.0

    try:
        op.approx_leverage_scores([[1.0, 1.0]] * 20, 0.5)
    except op.NumericalError:
        pass
    else:
        raise AssertionError("rank-deficient input should raise NumericalError")

    try:
        op.Sketch("osnap-block", m=8, n=10, s=3)
    except ValueError:
        pass
    else:
        raise AssertionError("s must divide m for block sketches")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "a.mtx")
        op.write_matrix_market(path, a)
        assert op.read_matrix_market(path) == a
        op.write_matrix_market(path, a, sparse=True)
        assert op.read_matrix_market(path) == a

    print("osnap_py smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
