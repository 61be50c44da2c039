"""The numba kernels and the pure-numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sgmc import _decode_kernels as K
from sgmc import backend
from sgmc.channel import ChannelSpec, transmit
from sgmc.construction import nu_profile, sample_generator
from sgmc.gf2 import BitVec, encode, pack_bits, staircase_reduce_rows

needs_numba = pytest.mark.skipif(backend() != "numba", reason="numba backend not active")


@needs_numba
def test_reduce_kernel_py_func(rng):
    bits = rng.integers(0, 2, size=(20, 50), dtype=np.uint8)
    bits[:, :20] = np.tril(bits[:, :20], -1) + np.eye(20, dtype=np.uint8)
    src = pack_bits(bits)
    a, b = np.empty_like(src), np.empty_like(src)
    staircase_reduce_rows(src, 20, a)
    staircase_reduce_rows.py_func(src, 20, b)
    np.testing.assert_array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("decoder", [K.LC_ROSD, K.LC_OSD, K.OSD, K.ML])
def test_decode_frame_py_func(decoder):
    code = sample_generator(nu_profile(24, 12, 5), 3)
    p = code.profile
    gbits = np.ascontiguousarray(code.bits)
    for f in range(5):
        obs = transmit(encode(BitVec.zeros(12), code.generator), ChannelSpec.awgn(0.8), f)
        outs = []
        for fn in (K.decode_frame, K.decode_frame.py_func):
            alpha = np.empty(13 << 6, np.float64)
            uhat = np.zeros(12, np.uint8)
            res = fn(gbits, code.generator.words, np.array(p.starts), np.array(p.ends), decoder, 6, 200, 2,
                     obs.llr, alpha, uhat)
            outs.append((tuple(int(x) for x in res), uhat.tolist()))
        assert outs[0] == outs[1]


SCRIPT = """
import numpy as np
from sgmc import backend
from sgmc.harness import SimConfig, run_simulation
from sgmc.bounds.rcu import partial_rcu
from sgmc.construction import nu_profile
r = run_simulation(SimConfig(profile="nu 24 12 5", snr=[2.0], min_errors=5, max_frames=60, delta=4, lmax=64))[0]
e = partial_rcu(nu_profile(24, 12, 5), sigma=0.9, n_outer=10, seed=1)
print(backend(), r.frames, r.frame_errors, r.avg_teps, repr(e.value))
"""


def run(flag):
    env = dict(os.environ, SGMC_DISABLE_NUMBA=flag)
    return subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True).stdout.split()


def test_fallback_matches_numba():
    fast, slow = run("0"), run("1")
    assert slow[0] == "python"
    assert fast[1:4] == slow[1:4]
    assert float(fast[4]) == pytest.approx(float(slow[4]), rel=1e-12)
