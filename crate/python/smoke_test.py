#!/usr/bin/env python3
"""Smoke test for the toruslab Python extension.

Builds the cdylib with cargo if needed, loads it, and exercises the main
types and operations end to end. Run from anywhere:

    python3 python/smoke_test.py [--release]
"""

import argparse
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "toruslab-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    lib = ROOT / "target" / profile / "libtoruslab.so"
    if not lib.exists():  # macOS fallback
        lib = ROOT / "target" / profile / "libtoruslab.dylib"
    stage = pathlib.Path(tempfile.mkdtemp(prefix="toruslab-py-"))
    shutil.copy(lib, stage / "toruslab.so")
    sys.path.insert(0, str(stage))
    import toruslab

    return toruslab


def frac(s: str) -> Fraction:
    return Fraction(s)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--release", action="store_true")
    args = parser.parse_args()
    tl = build_and_import(args.release)
    print(f"toruslab {tl.__version__} loaded")

    checks = 0

    def ok(name: str, cond: bool):
        nonlocal checks
        assert cond, f"FAILED: {name}"
        checks += 1
        print(f"  ok {name}")

    # convergent ladder of the golden-type prefix
    golden = tl.Angle.golden(20)
    ok("golden q_11 = 144", golden.q(11) == "144")
    table = json.loads(golden.convergents_json())
    ok("ladder rows present", len(table["rows"]) == 22)

    # canonical expansion round trip
    a = tl.Angle.from_rational("144/233", 20)
    ok("expansion of 144/233", a.quotients() == ["0"] + ["1"] * 10 + ["2"])
    ok("value round trip", a.value() == "144/233")

    # circle norm and psi
    ok("norm(7/3) = 1/3", abs(tl.circle_norm("7/3") - 1 / 3) < 1e-15)
    ok("psi(1/4) = (4, 4/3, 4)", tl.psi("1/4") == (4.0, 4.0 / 3.0, 4.0))

    # exact Birkhoff sum matches an independent Fraction-arithmetic oracle
    sqrt2 = tl.Angle.sqrt2(12)
    alpha = frac(sqrt2.value())
    x = Fraction(1, 7)
    expected = Fraction(0)
    for i in range(12):
        y = (x + i * alpha) % 1
        expected += 1 / min(y, 1 - y)
    got = tl.birkhoff_sum(sqrt2, "1/7", 12, "exact")
    ok("exact Birkhoff sum matches Fraction oracle", frac(got["exact"]) == expected)

    # theta symmetry: Θ·(Θ∘J) = 1 exactly
    theta_x = tl.theta(sqrt2, "1/7", "1/3", 10, "exact")
    j = tl.j_involution(sqrt2, 10, "1/3", "1/7")
    theta_j = tl.theta(sqrt2, j, "1/3", 10, "exact")
    ok("theta symmetry", frac(theta_x[1]) * frac(theta_j[1]) == 1)

    # exact vs double mode
    big = tl.Angle.sqrt2(20)
    exact = tl.birkhoff_sum(big, "1/7", 20000, "exact")
    double = tl.birkhoff_sum(big, "1/7", 20000, "double")
    rel = abs(exact["total"] - double["total"]) / exact["total"]
    ok("double mode tracks exact to 1e-9", rel < 1e-9 and not double["condition_flagged"])

    # physical-measure weights
    ok("mu_infinity(4,1) = (1/3, 2/3)", tl.mu_infinity(4.0, 1.0) == (1 / 3, 2 / 3))

    # sector bounds hold
    sb = tl.sector_bounds(sqrt2, "1/7", 4)
    ok("sector bounds", sb["holds"] and sb["lower"] <= sb["sum"] <= sb["upper"])

    # orbit-neighbourhood measure identity
    measure, matches = tl.e_set_measure(sqrt2, 3, 1)
    ok("E-set measure closed form", matches)
    samples = tl.e_set_samples(sqrt2, 3, 1, 5, 7)
    ok("E-set sampling", len(samples) == 5)

    # certificates and a regime verdict
    certs = json.loads(tl.certificates_json(tl.Angle.construct_rapid(1.0, 0.5, 4), 6, "1", 3))
    ok("rapid-growth certificate", len(certs["growth"]["witnesses"]) >= 4)
    q_y = tl.mod1_sum(["3/10", sqrt2.value(), sqrt2.value()])  # p_y + 2*alpha
    verdict = json.loads(
        tl.verdict_json(tl.Angle.sqrt2(16), ("1/2", "3/10"), ("1/2", q_y), 1.0, 1.0, "1/4", 12)
    )
    ok("sqrt2 same-orbit verdict is historic", verdict["regime"] == "historic")
    ok("verdict strength labels finite evidence", verdict["verdict_strength"] == "consistent-with")

    # special flow: ledger identity and occupancy sanity
    run = tl.special_flow(
        tl.Angle.sqrt2(20),
        ("1/2", "3/10"),
        ("1/2", "4/5"),
        1.0,
        1.0,
        "1/4",
        "27/100",
        20000,
    )
    ok("special flow ledger residual tiny", run["ledger_residual"] < 1e-9)
    ok("occupancies in [0,1]", 0.0 <= run["final_occ_p"] <= 1.0 and 0.0 <= run["final_occ_q"] <= 1.0)

    # euler preset short run
    euler = tl.euler_preset("fig1", 20000)
    ok("euler occupancy recorded", len(euler["occupancy"]) > 10 and euler["stagnated_at"] is None)

    print(f"PASS: {checks} checks")
    return 0


if __name__ == "__main__":
    sys.exit(main())
