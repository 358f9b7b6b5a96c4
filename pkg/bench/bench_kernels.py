"""Compare the compiled and pure-Python value-iteration kernels.

    python3 bench/bench_kernels.py [--repeat 3] [--sizes 3x5,4x6,5x7]

Each gridworld is a fish/shipwreck layout of the given size; both backends
must produce identical fronts, and the timing of the full fixed point is
reported per backend.
"""
import argparse
import copy
import time

from pdfasynth.game import augment, build_product
from pdfasynth.gridworld import build_gridworld
from pdfasynth.pareto_synthesis import BACKENDS, compute_pareto_front
from pdfasynth.scenarios import FISH_FINISH_POLICY, FISH_GRID, ship_fish_truth


def grid_product(rows, cols):
    spec = copy.deepcopy(FISH_GRID)
    spec.update(rows=rows, cols=cols)
    spec["cells"] = {"shipwreck": [[0, cols - 1]]}
    spec["env"][0].update(start=[rows - 1, cols // 2], region=[[rows - 1, 0], [rows - 1, cols - 1]])
    g = augment(build_gridworld(spec))
    return build_product(g, ship_fish_truth(), finish_policy=FISH_FINISH_POLICY)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="3x5,4x6,5x7")
    args = ap.parse_args(argv)
    print(f"{'grid':>6} {'states':>7} {'edges':>7} {'iters':>5} "
          + " ".join(f"{b:>10}" for b in BACKENDS) + "  speedup")
    for size in args.sizes.split(","):
        rows, cols = (int(x) for x in size.split("x"))
        pg = grid_product(rows, cols)
        times, fronts, iters = {}, {}, 0
        for name in BACKENDS:
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                res = compute_pareto_front(pg, backend=name)
                best = min(best, time.perf_counter() - t0)
            times[name], fronts[name], iters = best, res.values, res.iterations
        if len(set(map(str, fronts.values()))) != 1:
            raise SystemExit(f"backends disagree on {size}")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{size:>6} {pg.n_states:>7} {pg.n_edges:>7} {iters:>5} "
              + " ".join(f"{times[b]:>9.4f}s" for b in BACKENDS) + f"  {speed:6.1f}x")


if __name__ == "__main__":
    main()
