#!/usr/bin/env python3
"""Compare the compiled kernels against the NumPy fallback.

Times the three hot operations (forward, backward, Adam step) on a
training-shaped workload and one full training run per backend, then checks
that both backends agree numerically.

Run:  python3 benchmarks/bench_backends.py [--batch 32] [--input 1286]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from itforge.kernels import available_backends, get_backend
from itforge.network import Head, TrainConfig, train


def time_op(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workload(rng, batch, input_dim, hidden, outputs):
    x = np.ascontiguousarray(rng.normal(size=(batch, input_dim)))
    w1 = np.ascontiguousarray(rng.normal(scale=0.05, size=(hidden, input_dim)))
    b1 = np.zeros(hidden)
    w2 = np.ascontiguousarray(rng.normal(scale=0.05, size=(outputs, hidden)))
    b2 = np.zeros(outputs)
    dz2 = np.ascontiguousarray(rng.normal(scale=0.01, size=(batch, outputs)))
    return x, w1, b1, w2, b2, dz2


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--input", type=int, default=1286)
    parser.add_argument("--hidden", type=int, default=128)
    parser.add_argument("--outputs", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "native" not in backends:
        print("note: compiled extension not built; timing the fallback only")

    rng = np.random.default_rng(0)
    x, w1, b1, w2, b2, dz2 = workload(
        rng, args.batch, args.input, args.hidden, args.outputs
    )

    results: dict[str, dict[str, float]] = {}
    outputs: dict[str, np.ndarray] = {}
    for name in backends:
        backend = get_backend(name)
        h, p = backend.forward(x, w1, b1, w2, b2)
        outputs[name] = p
        times = {
            "forward": time_op(lambda: backend.forward(x, w1, b1, w2, b2), args.repeats),
            "backward": time_op(
                lambda: backend.backward(x, h, dz2, w2), args.repeats
            ),
        }
        param = w1.copy().reshape(-1)
        grad = rng.normal(size=param.shape)
        m = np.zeros_like(param)
        v = np.zeros_like(param)
        times["adam_step"] = time_op(
            lambda: backend.adam_step(param, grad, m, v, 1, 1e-3, 0.9, 0.999, 1e-8),
            args.repeats,
        )
        start = time.perf_counter()
        train(
            [(x[i % args.batch], i % args.outputs) for i in range(200)],
            Head.CLASSIC,
            TrainConfig(epochs=20, seed=0, backend=name),
        )
        times["train(200x20ep)"] = time.perf_counter() - start
        results[name] = times

    ops = ["forward", "backward", "adam_step", "train(200x20ep)"]
    header = f"{'op':<18}" + "".join(f"{name:>14}" for name in backends)
    if len(backends) == 2:
        header += f"{'faster':>18}"
    print()
    print(header)
    print("-" * len(header))
    for op in ops:
        row = f"{op:<18}" + "".join(f"{results[n][op] * 1e3:>12.3f}ms" for n in backends)
        if len(backends) == 2:
            times = {n: results[n][op] for n in backends}
            fast = min(times, key=times.get)
            slow = max(times, key=times.get)
            row += f"{fast:>12} {times[slow] / times[fast]:>4.1f}x"
        print(row)

    if len(backends) == 2:
        a, b = (outputs[n] for n in backends)
        print(f"\nmax |probability difference| between backends: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
