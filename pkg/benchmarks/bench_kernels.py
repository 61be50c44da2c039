"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is made at import
time from ``SGMC_DISABLE_NUMBA``.  The script prints wall time per workload
and checks that both backends agree (exactly for integer outputs, to 1e-12
relative for floating-point bound values).

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

import numpy as np

WORKER = r"""
import json, sys, time
import numpy as np
import sgmc
from sgmc import _decode_kernels as K
from sgmc.bounds.rcu import partial_rcu
from sgmc.construction import nu_profile, sample_generator
from sgmc.gf2 import BitMatrix, reduce_staircase
from sgmc.channel import sigma_from_ebn0

repeat = int(sys.argv[1])
out = {"backend": sgmc.backend()}

def timed(name, fn):
    fn()  # warm-up (compilation or cache load)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t)
    res = np.ascontiguousarray(res)
    out[name] = {"seconds": best, "values": res.astype(np.float64).ravel().tolist()}

code = sample_generator(nu_profile(64, 32, 12), 7)

def reduce():
    acc = []
    for s in range(20):
        c = sample_generator(nu_profile(64, 32, 12), s)
        piv = [e - 1 for e in c.profile.ends]
        perm = piv + [j for j in range(c.n) if j not in set(piv)]
        Gt, T = reduce_staircase(c.generator.columns(perm))
        acc.append(Gt.words)
    return np.concatenate(acc)

def frames(decoder, delta, nframes):
    def run():
        p = code.profile
        err = np.zeros(nframes, np.uint8)
        teps = np.zeros(nframes, np.int64)
        opt = np.zeros(nframes, np.uint8)
        K.simulate_frames(code.bits.copy(), code.generator.words, np.array(p.starts, np.int64),
                          np.array(p.ends, np.int64), decoder, delta, 1 << 12, 2, 0,
                          sigma_from_ebn0(2.5, 0.5), np.uint64(11), 0, nframes, err, teps, opt)
        return np.concatenate([err.astype(np.int64), teps])
    return run

def rcu():
    e = partial_rcu(nu_profile(64, 32, 12), sigma=sigma_from_ebn0(3.0, 0.5), n_outer=20, seed=3)
    return np.array(e.terms)

timed("staircase_reduce x20 [32,64]", reduce)
timed("lc-rosd 20 frames [64,32]", frames(K.LC_ROSD, 8, 20))
timed("lc-osd 20 frames [64,32]", frames(K.LC_OSD, 8, 20))
timed("partial_rcu 20x5 samples [64,32]", rcu)
print(json.dumps(out))
"""


def run_backend(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, SGMC_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, max(1, args.repeat // 3))
    print(f"{'workload':36s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}  same")
    ok = True
    for name in fast:
        if name == "backend":
            continue
        a, b = fast[name], slow[name]
        # integer workloads must match exactly; float sums may differ in the last ulps
        same = bool(np.allclose(a["values"], b["values"], rtol=1e-12, atol=0.0))
        ok &= same
        print(f"{name:36s} {a['seconds']:10.4f} {b['seconds']:10.4f} {b['seconds'] / a['seconds']:8.1f}  {same}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
