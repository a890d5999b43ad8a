"""Smoke test for the gtd extension module.

Build with `cargo build -p gtd-py --features extension-module`, copy
target/debug/libgtd.so to gtd.so somewhere on PYTHONPATH, then run this file.
"""

import math
import random

import gtd


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * (1.0 + abs(b))


def main():
    t = gtd.Tensor([2, 2], [1.0, 2.0, 3.0, 4.0])
    assert t.get([0, 1]) == 3.0
    rows, cols, data = t.unfold(1)
    assert (rows, cols) == (2, 2) and data == [1.0, 3.0, 2.0, 4.0]

    op = gtd.Operator.random_mask(48, 0.5, seed=3)
    assert (op.in_dim, op.out_dim) == (48, 24)
    rng = random.Random(0)
    x = [rng.gauss(0, 1) for _ in range(48)]
    u = [rng.gauss(0, 1) for _ in range(24)]
    lhs = sum(a * b for a, b in zip(op.forward(x), u))
    rhs = sum(a * b for a, b in zip(x, op.adjoint(u)))
    assert close(lhs, rhs)
    assert close(gtd.max_eigenvalue(op), 1.01, 1e-8)

    assert gtd.y_update("l2", [1.0, 2.0], [5.0, 5.0], 1.0) == [1.0, 2.0]
    assert gtd.y_update("l1", [0.0], [5.0], 1.0) == [4.0]
    assert close(gtd.eval_loss("kl", [1.0], [math.e]), math.e - 2.0)

    spec = gtd.ModelSpec("cp", [4, 4, 3], [2], seed=1)
    truth = gtd.init(gtd.ModelSpec("cp", [4, 4, 3], [2], seed=9)).reconstruct()
    b = gtd.Operator.identity(48).forward(truth.data)
    cfg = gtd.SolverConfig(loss="l2", max_iter=200, tol=1e-12)
    sol = gtd.admm_mm(b, gtd.Operator.identity(48), spec, cfg)
    assert all(b2 <= a2 + 1e-9 for a2, b2 in zip(sol.objectives, sol.objectives[1:]))
    assert sol.objectives[-1] < 1e-8, sol.objectives[-1]
    assert sol.params.reconstruct().shape == [4, 4, 3]

    pg = gtd.pg(b, gtd.Operator.identity(48), spec, gtd.SolverConfig(max_iter=20), 0.1)
    assert pg.iterations == 20

    try:
        gtd.ModelSpec("tucker", [4, 4], [2, 2, 2])
    except ValueError:
        pass
    else:
        raise AssertionError("bad ranks accepted")

    print("gtd", gtd.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
