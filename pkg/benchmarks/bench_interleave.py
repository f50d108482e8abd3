"""Compare the compiled and pure-Python interleaving kernels.

Usage: python benchmarks/bench_interleave.py [--repeat N] [--budget B]
"""

from __future__ import annotations

import argparse
import statistics
import timeit
from pathlib import Path

from tmkit import kernels
from tmkit.dsl import load
from tmkit.net import compile_net
from tmkit.sim import load_config

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def encode(name: str):
    model = load(CORPUS / f"{name}.tm")
    cfg = load_config(CORPUS / f"{name}.cfg")
    net = compile_net(model, cfg.durations)
    index = {r: i for i, r in enumerate(net.refs)}
    spawns = [index[model.ref(s.stage)] for s in cfg.spawns for _ in range(s.count)]
    return net, spawns


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--budget", type=int, default=12)
    args = ap.parse_args()
    backends = [("python", kernels.python_enumerate)]
    if kernels.compiled_enumerate is not None:
        backends.append(("cython", kernels.compiled_enumerate))
    else:
        print("compiled kernel not built; timing the pure-Python kernel only")
    print(f"{'model':<10}{'backend':<9}{'sequences':>10}{'median ms':>12}{'speedup':>9}")
    for name in ("person", "hammer", "chalice"):
        net, spawns = encode(name)
        base = None
        for label, fn in backends:
            result, _ = fn(net, spawns, args.budget)
            times = timeit.repeat(lambda: fn(net, spawns, args.budget),
                                  number=1, repeat=args.repeat)
            ms = statistics.median(times) * 1000
            base = base or ms
            print(f"{name:<10}{label:<9}{len(result):>10}{ms:>12.2f}{base / ms:>8.1f}x")


if __name__ == "__main__":
    main()
