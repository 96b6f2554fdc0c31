"""Throughput comparison of the compiled kernels against the pure-Python twins.

Times the two hot paths (sketch updates and window training) plus a short
end-to-end streaming run, on synthetic Zipf data.

    python benchmarks/bench_kernels.py [--dim 100] [--tokens 200000]
"""

import argparse
import time

import numpy as np

from streamvec._kernels import pure

try:
    from streamvec._kernels import _speedups
except ImportError:
    _speedups = None


def bench_sketch(impl, streams):
    t0 = time.perf_counter()
    for stream in streams:
        core = impl.SketchCore(1000)
        observe = core.observe
        for w in stream:
            observe(w)
    return time.perf_counter() - t0


def bench_sentences(impl, dim, negatives, n_sentences, seed=3):
    rng = np.random.Generator(np.random.PCG64(seed))
    slots = 5000
    tgt = (0.3 * rng.standard_normal((slots, dim))).astype(np.float32)
    ctx = (0.3 * rng.standard_normal((slots, dim))).astype(np.float32)
    steps = np.ones(slots, dtype=np.int64)
    reservoir = rng.integers(0, slots, 100_000).astype(np.int64)
    sentences = [rng.integers(0, slots, 20).astype(np.int64) for _ in range(n_sentences)]
    gen = np.random.Generator(np.random.PCG64(seed + 1))
    pairs = 0
    t0 = time.perf_counter()
    for sent in sentences:
        trained, _ = impl.train_stream_sentence(
            tgt, ctx, steps, 2.5e-2, 2.5e-6, 1e5, 1.0, 0.5, 0,
            sent, 2, 1, negatives, reservoir, len(reservoir), gen,
        )
        pairs += trained
    return time.perf_counter() - t0, pairs


def bench_end_to_end(tokens, dim, negatives, seed=11):
    from streamvec.stream import StreamModel, TrainerConfig

    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, 20_001)
    probs = weights / weights.sum()
    draws = rng.choice(20_000, size=(tokens // 20, 20), p=probs)
    words = np.array([f"w{i}" for i in range(20_000)])
    sentences = words[draws].tolist()
    model = StreamModel(TrainerConfig(
        vocab_capacity=5000, reservoir_capacity=1_000_000, negatives=negatives,
        dim=dim, context_radius=2, dynamic_windows=True, rng_seed=1))
    t0 = time.perf_counter()
    model.train_stream(sentences)
    return time.perf_counter() - t0, model.stats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--negatives", type=int, default=5)
    parser.add_argument("--tokens", type=int, default=200_000)
    parser.add_argument("--sentences", type=int, default=2000)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    weights = 1.0 / np.arange(1, 5001)
    probs = weights / weights.sum()
    streams = np.array([f"w{i}" for i in range(5000)])[
        rng.choice(5000, size=(5, 100_000), p=probs)
    ].tolist()
    n_obs = 5 * 100_000

    backends = [("python", pure)]
    if _speedups is not None:
        backends.append(("cython", _speedups))
    else:
        print("compiled extension not available; benchmarking the pure backend only")

    print(f"\nsketch updates ({n_obs} observations, K=1000)")
    base = None
    for name, impl in backends:
        elapsed = bench_sketch(impl, streams)
        rate = n_obs / elapsed / 1e6
        speedup = "" if base is None else f"  ({base / elapsed:.1f}x)"
        base = base or elapsed
        print(f"  {name:7s} {elapsed:7.2f}s  {rate:6.2f} M obs/s{speedup}")

    print(f"\nwindow training ({args.sentences} sentences, D={args.dim}, S={args.negatives})")
    base = None
    for name, impl in backends:
        elapsed, pairs = bench_sentences(impl, args.dim, args.negatives, args.sentences)
        rate = pairs * 2 / elapsed / 1e3  # ~2 pairs per trained window at C=2 dynamic
        speedup = "" if base is None else f"  ({base / elapsed:.1f}x)"
        base = base or elapsed
        print(f"  {name:7s} {elapsed:7.2f}s  windows={pairs}  {speedup}")

    print(f"\nend-to-end streaming ({args.tokens} tokens, D={args.dim}, S={args.negatives})")
    import os

    if _speedups is None:
        elapsed, stats = bench_end_to_end(args.tokens, args.dim, args.negatives)
        print(f"  python  {elapsed:7.2f}s  {args.tokens / elapsed / 1e3:6.1f} K tokens/s")
    else:
        # backend is chosen at import, so run each in a subprocess
        import subprocess
        import sys

        for name, env_value in (("python", "1"), ("cython", "")):
            env = dict(os.environ)
            if env_value:
                env["STREAMVEC_PURE_PYTHON"] = env_value
            else:
                env.pop("STREAMVEC_PURE_PYTHON", None)
            code = (
                "from benchmarks.bench_kernels import bench_end_to_end;"
                f"e, s = bench_end_to_end({args.tokens}, {args.dim}, {args.negatives});"
                "print(f'{e:.2f} {s.contexts_trained}')"
            )
            out = subprocess.run([sys.executable, "-c", code], env=env,
                                 capture_output=True, text=True, check=True)
            elapsed = float(out.stdout.split()[0])
            print(f"  {name:7s} {elapsed:7.2f}s  {args.tokens / elapsed / 1e3:6.1f} K tokens/s")


if __name__ == "__main__":
    main()
