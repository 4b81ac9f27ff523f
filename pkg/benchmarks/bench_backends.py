"""Compare the jitted kernels against the pure-numpy fallback.

Each backend runs in its own subprocess so the SPADCAL_DISABLE_NUMBA flag is
evaluated at import time, exactly as a user would experience it.

Usage: python benchmarks/bench_backends.py [--duration-s 20] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json
import sys
import time

import spadcal
from spadcal import (
    DetectorParams,
    PulseTrainParams,
    SimConfig,
    eta_expost,
    simulate_stream,
    synth_dark_model,
    validate_triggers,
)

duration_s, repeats = float(sys.argv[1]), int(sys.argv[2])
holdoff = 10_000_000
det = DetectorParams(holdoff_ps=holdoff, dark_rate_hz=870.0)
dark = synth_dark_model(870.0, 8e-6, holdoff, holdoff, holdoff + 500_000_000)
cfg = SimConfig(
    detector=det,
    pulses=PulseTrainParams(rep_rate_hz=150_000, n_ph=1.0),
    dark_model=dark,
    duration_s=duration_s,
    seed=42,
    eta=0.1,
)

# warm-up pass so jit compilation is not measured
warm = simulate_stream(
    SimConfig(detector=det, pulses=cfg.pulses, dark_model=dark,
              duration_s=0.05, seed=1, eta=0.1)
)
validate_triggers(warm, det)

sim_times, scan_times = [], []
stream = None
for _ in range(repeats):
    t0 = time.perf_counter()
    stream = simulate_stream(cfg)
    sim_times.append(time.perf_counter() - t0)
    t0 = time.perf_counter()
    validate_triggers(stream, det)
    eta_expost(stream, det, 1.0)
    scan_times.append(time.perf_counter() - t0)

print(json.dumps({
    "backend": "numba" if spadcal.USE_NUMBA else "numpy",
    "n_tags": len(stream),
    "simulate_s": min(sim_times),
    "scan_s": min(scan_times),
}))
"""


def run_backend(disable_numba, duration_s, repeats):
    env = dict(os.environ)
    if disable_numba:
        env["SPADCAL_DISABLE_NUMBA"] = "1"
    else:
        env.pop("SPADCAL_DISABLE_NUMBA", None)
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(duration_s), str(repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--duration-s", type=float, default=20.0,
                        help="simulated acquisition time per run")
    parser.add_argument("--repeats", type=int, default=3,
                        help="repetitions per backend; best time is reported")
    args = parser.parse_args()

    results = [run_backend(False, args.duration_s, args.repeats),
               run_backend(True, args.duration_s, args.repeats)]

    print(f"{'backend':>8} {'tags':>10} {'simulate [s]':>13} {'scan [s]':>10}")
    for r in results:
        print(f"{r['backend']:>8} {r['n_tags']:>10} "
              f"{r['simulate_s']:>13.3f} {r['scan_s']:>10.3f}")
    jit, py = results
    print(f"\nspeedup: simulate x{py['simulate_s'] / jit['simulate_s']:.1f}, "
          f"scan x{py['scan_s'] / jit['scan_s']:.1f}")


if __name__ == "__main__":
    main()
