#!/usr/bin/env python3
"""Smoke test for the elastowave Python extension.

Build the module first:

    cargo build -p elastowave-py --release

then run:

    python3 python/smoke_test.py
"""

import json
import math
import os
import shutil
import sys
import tempfile


def load_module():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", profile, "libelastowave.so")
        for profile in ("release", "debug")
    ]
    built = [p for p in candidates if os.path.exists(p)]
    if not built:
        sys.exit("build the extension first: cargo build -p elastowave-py")
    newest = max(built, key=os.path.getmtime)
    stage = tempfile.mkdtemp(prefix="elastowave_py_")
    shutil.copy(newest, os.path.join(stage, "elastowave.so"))
    sys.path.insert(0, stage)
    import elastowave

    return elastowave


def approx(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    ew = load_module()

    # wave speeds
    m = ew.Material(2.0, 1.0)
    cp, cs = m.wave_speeds()
    assert (cp, cs) == (2.0, 1.0), (cp, cs)

    # invalid material rejected
    try:
        ew.Material(-2.0, 1.0)
        raise AssertionError("lambda+mu <= 0 must be rejected")
    except ValueError:
        pass

    # boundary classification: glancing P at tau = c_P |xi|
    tags = ew.boundary_classification(m, 2.0, (1.0, 0.0, 0.0))
    assert tags["p"] == "glancing" and tags["s"] == "hyperbolic", tags

    # P+P resonance roots at cos(alpha) = 0 for lambda=0, mu=1: -2 ± sqrt(3)
    soft = ew.Material(0.0, 1.0)
    roots = sorted(r["b"] for r in ew.resonance_roots(soft, "p", "p", 0.0))
    assert approx(roots[0], -2.0 - math.sqrt(3.0)), roots
    assert approx(roots[1], -2.0 + math.sqrt(3.0)), roots

    # S+S below the interaction condition reports no-interaction
    rows = ew.resonance_roots(soft, "s", "s", 0.5)
    assert rows[0]["outcome"] == "no-interaction", rows

    # closed form equals the tensor contraction on a resonant configuration
    med = ew.Material(1.3, 0.8, 0.4, -0.2, 0.9)
    for case in ("pp_to_sh", "psh_to_p", "psh_to_sh", "psv_to_sv", "shsh_to_p", "svsv_to_p"):
        alpha = 2.2 if case in ("shsh_to_p", "svsv_to_p") else 1.1
        out = ew.resonant_amplitudes(case, med, alpha, 0, 1.0 + 0.0j, 0.7 - 0.2j)
        t, c = out["tensor"], out["closed_form"]
        assert abs(t - c) <= 1e-10 * max(abs(t), abs(c), 1e-6), (case, t, c)

    # the interaction table has 7 rows and SH+SV always vanishes
    table = ew.interaction_table(med)
    assert len(table) == 7
    assert any(r[0] == "SH+SV->none" and r[2] == "vanishing" for r in table)
    assert ew.classify("pp_to_sh", ew.Material(1.0, 1.0, -6.0, 1.0)) == "vanishing"

    # recovery round trip through the JSON measurement schema
    p = ew.Material(2.0, 1.0, 0.3, -0.4)
    ms = []
    for alpha, amp2 in ((0.7, 1.0), (1.9, 0.8)):
        out = ew.resonant_amplitudes("psv_to_sv", p, alpha, 0, 1.0 + 0.0j, amp2 + 0.0j)
        ms.append(
            {
                "case": "PSvToSv",
                "alpha": out["alpha"],
                "psi": out["psi"],
                "r1": 1.0,
                "r2": None,
                "r_out": None,
                "amp1": [1.0, 0.0],
                "amp2": [amp2, 0.0],
                "measured": [out["closed_form"].real, out["closed_form"].imag],
                "noise_level": 0.0,
            }
        )
    # r2/r_out come from the resonant geometry; recompute them the same way
    # the library does (|b| for the scaled second covector)
    for mrec, (alpha, amp2) in zip(ms, ((0.7, 1.0), (1.9, 0.8))):
        roots = ew.resonance_roots(p, "p", "s", math.cos(alpha))
        b_s = next(r["b"] for r in roots if r["case"] == "PsToS")
        mrec["r2"] = abs(b_s)
        out_sq = 1.0 + b_s * b_s + 2.0 * b_s * math.cos(alpha)
        mrec["r_out"] = math.sqrt(out_sq)
    rec = json.loads(ew.recover_ab_json(json.dumps(ms), 2.0, 1.0, False))
    assert approx(rec["a_landau"], 0.3, 1e-9), rec
    assert approx(rec["b_landau"], -0.4, 1e-9), rec

    # lambda, mu from travel times
    lam, mu = ew.recover_lame_py([(2.0, "p", 1.0), (2.0, "s", 2.0)])
    assert approx(lam, 2.0) and approx(mu, 1.0)

    print("smoke test passed")


if __name__ == "__main__":
    main()
