"""Compare the compiled and numpy alignment kernels.

    python benchmarks/bench_matcher.py [--pairs 40] [--eval]

Reports per-match latency for genuine-like and impostor-like pairs at the
default synthetic template size, checks both backends return identical
results, and optionally times a small evaluation run.
"""

import argparse
import statistics
import time

from minutiae_stego import matcher
from minutiae_stego.codec import EmbedConfig
from minutiae_stego.harness import GenParams, PerturbParams, gen_template, perturb, run_eval
from minutiae_stego.matcher import PreparedTemplate, match_templates


def time_backend(pairs, backend, repeat):
    per_call = []
    results = []
    for a, b in pairs:
        start = time.perf_counter()
        for _ in range(repeat):
            r = match_templates(a, b, backend=backend)
        per_call.append((time.perf_counter() - start) / repeat)
        results.append(r)
    return per_call, results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--eval", action="store_true", help="also time run_eval(db_size=10)")
    args = ap.parse_args()

    genuine, impostor = [], []
    for s in range(args.pairs):
        t = gen_template(GenParams(seed=s))
        genuine.append((PreparedTemplate(t), PreparedTemplate(perturb(t, PerturbParams(seed=s)))))
        impostor.append((PreparedTemplate(t), PreparedTemplate(gen_template(GenParams(seed=s + 10_000)))))

    backends = sorted(matcher._KERNELS)
    print(f"default backend: {matcher.BACKEND}; available: {', '.join(backends)}")
    timings = {}
    for kind, pairs in (("genuine", genuine), ("impostor", impostor)):
        outputs = {}
        for be in backends:
            per_call, outputs[be] = time_backend(pairs, be, args.repeat)
            timings[(kind, be)] = statistics.median(per_call)
            print(f"{kind:9s} {be:7s} median {1e3 * timings[(kind, be)]:8.2f} ms/match")
        if len(backends) == 2:
            same = outputs["cython"] == outputs["python"]
            speedup = timings[(kind, "python")] / timings[(kind, "cython")]
            print(f"{kind:9s} identical results: {same}; speedup x{speedup:.1f}")

    if args.eval:
        cfgs = [EmbedConfig(b=b) for b in (1, 2, 3)]
        for be in backends:
            saved = matcher.BACKEND
            matcher.BACKEND = be
            try:
                start = time.perf_counter()
                run_eval(10, cfgs=cfgs)
                print(f"run_eval(db_size=10, 3 configs) {be:7s} {time.perf_counter() - start:6.1f} s")
            finally:
                matcher.BACKEND = saved


if __name__ == "__main__":
    main()
