"""
The command-line workflow
=========================

Everything in the library is reachable from the `liouville-corner` console
script: verify a member against the full battery of identities, compute its
energies, export it as CSV, solve the boundary-value problem, and fit
parameters to a field file.  Reports are JSON (stable key order, versioned);
grids are CSV with the fixed header r,theta,s,t,u,e_u.  Exit codes: 0 all
checks passed, 1 a check failed or the field is not in the family, 2 invalid
parameters or unparsable input.

This script drives the CLI in-process through its main() entry point, which
is exactly what the console script calls.
"""

import json
import os
import tempfile

from liouville_corner.cli import main

workdir = tempfile.mkdtemp(prefix="liouville_cli_demo_")
print("working in", workdir)


def run(*argv):
    print("\n$ liouville-corner", " ".join(argv))
    code = main(list(argv))
    print(f"[exit {code}]")
    return code


# ---------------------------------------------------------------------------
# 1. verify: the whole identity battery on one member, JSON report

report_path = os.path.join(workdir, "verify.json")
run("verify", "--alpha", "0.5", "--lambda", "1.3",
    "--c1", "0.4", "--c2", "-0.2", "--out", report_path)
report = json.load(open(report_path))
print("all_pass =", report["all_pass"], " d =", report["d_value"])
for check in report["checks"][:4]:
    print(f"  {check['name']:24s} residual {check['residual_norm']:.2e} "
          f"<= {check['tolerance']:.0e}")
print("  ... ({} checks total)".format(len(report["checks"])))

# an inadmissible parameter set is refused with exit code 2:
run("verify", "--alpha", "2", "--c1", "1", "--c2", "0.5")

# ---------------------------------------------------------------------------
# 2. energy and the finite-radius balance

run("energy", "--alpha", "0.5", "--lambda", "1.3", "--c1", "0.4",
    "--c2", "-0.2", "--out", os.path.join(workdir, "energy.json"))
energy = json.load(open(os.path.join(workdir, "energy.json")))
print("d_value =", energy["d_value"], " expected", energy["expected_d"])

run("pohozaev", "--alpha", "0.5", "--out", os.path.join(workdir, "poho.json"))
poho = json.load(open(os.path.join(workdir, "poho.json")))
print("residuals:", [f"{e['residual']:.1e}" for e in poho["identity"]])

# ---------------------------------------------------------------------------
# 3. export a field, then recover its parameters with fit
#
# The CSV cells are repr() of the doubles, so a round trip through the file
# is bit-exact and the fit recovers lambda to ~1e-12.

field_path = os.path.join(workdir, "member.csv")
run("export", "--alpha", "0.5", "--lambda", "1.3", "--c1", "0.4",
    "--c2", "-0.2", "--grid", "24x17", "--rmin", "0.3", "--rmax", "6",
    "--out", field_path)
print("wrote", sum(1 for _ in open(field_path)) - 1, "grid rows")

fit_path = os.path.join(workdir, "fit.json")
run("fit", field_path, "--alpha", "0.5", "--out", fit_path)
fit = json.load(open(fit_path))
print("recovered lambda =", fit["params"]["lambda"],
      " (true 1.3), rms =", f"{fit['rms_residual']:.1e}")

# a deliberately broken file is a parse error, exit code 2:
broken = os.path.join(workdir, "broken.csv")
with open(broken, "w") as handle:
    handle.write("r,theta,s,u\n1.0,0.5,0.8,0.1\n")   # no t column
run("fit", broken, "--alpha", "0.5")

# ---------------------------------------------------------------------------
# 4. solve the BVP from the command line (verification mode)
#
# The JSON summary lands on stdout, the solved grid in the CSV.

run("solve", "--alpha", "0.5", "--lambda", "1.3", "--c1", "0.4",
    "--c2", "-0.2", "--grid", "64x32", "--rmin", "0.1", "--rmax", "10",
    "--out", os.path.join(workdir, "solution.csv"))

# ---------------------------------------------------------------------------
# 5. config files: flat key = value, flags override

config_path = os.path.join(workdir, "member.cfg")
with open(config_path, "w") as handle:
    handle.write("# the member under study\n"
                 "alpha = 0.5\n"
                 "lambda = 1.3\n"
                 "c1 = 0.4\n"
                 "c2 = -0.2\n")
run("verify", "--config", config_path, "--out",
    os.path.join(workdir, "verify2.json"))
print("report written from config-file parameters")
