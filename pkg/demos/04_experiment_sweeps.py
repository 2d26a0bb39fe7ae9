"""Run a reduced experiment sweep and print the theory-vs-simulation table.

The shipped spec files under demos/specs/ hold the desk-scale defaults
(N=2000, 10-20 trials; minutes of runtime).  This demo shrinks them to a
coffee-break scale so the output appears quickly; the CSV schema is
identical.  For the full artifacts run, e.g.:

    metricamp run demos/specs/wse_awgn.spec --threads 4
    metricamp aud demos/specs/aud.spec --threads 4
"""

import os
import tempfile

from metricamp.harness import parse_spec_file, run_experiment

HERE = os.path.dirname(__file__)


def shrink(spec, n=600, trials=4):
    spec.N = n
    spec.trials = trials
    return spec


with tempfile.TemporaryDirectory() as tmp:
    spec = shrink(parse_spec_file(os.path.join(HERE, "specs", "wse_awgn.spec")))
    spec.J_list = [1, 3]
    spec.output_path = os.path.join(tmp, "wse.csv")
    rows = run_experiment(spec, threads=4)
    print("weighted support set error vs rate (AWGN, beta=0.2):")
    print(f"  {'J':>2} {'R':>4} {'simulated':>12} {'theory':>10} {'delta_v':>9}")
    for r in rows:
        if r["row_kind"] == "aggregate":
            print(f"  {r['J']:>2} {r['R']:>4} "
                  f"{r['empirical_error']:>9.5f} +-{r['std_err']:.5f} "
                  f"{r['theoretic_error']:>10.5f} {r['delta_v']:>9.5f}")

    aud = shrink(parse_spec_file(os.path.join(HERE, "specs", "aud.spec")), trials=6)
    aud.R_list = [0.3, 0.5]
    aud.noise_list = [0.01]
    aud.output_path = os.path.join(tmp, "aud.csv")
    rows = run_experiment(aud, threads=4)
    print("\nactive user detection, Hamming distance (pipeline vs OMP):")
    for r in rows:
        if r["row_kind"] == "aggregate":
            print(f"  R={r['R']}: pipeline={r['empirical_error']:.5f}  "
                  f"omp={r['omp_error']:.5f}")
    print(f"\nCSV artifacts were written to {tmp} (deleted on exit); "
          "re-run via the CLI to keep them.")
