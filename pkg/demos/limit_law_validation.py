"""Validate simulated passage times against their limit law, end to end.

The validation harness simulates replicates, rescales the passage times
onto the law's natural time scale, and applies a one-sample KS test.
The first model's family exponents put it in the exponential regime, so
N*mu_1*sigma_2 should look like Exp(1).  A second, dilute model carries
the occupied-volume diagnostic, which compares the mean level-1 volume
Y_1(t) with its polynomial approximation v_1(t).

The same runs are available from the command line:

    torusmut validate --config config.json --output-dir out/

Run:  python demos/limit_law_validation.py
"""

import json

from torusmut import ModelParams
from torusmut.regimes import ScalingFamily
from torusmut.stats import ValidationConfig, run_validation


def show(report):
    print(f"regime: {report['regime']}, law: {report['law']}, "
          f"scale: {report['scale']['name']} = {report['scale']['value']:g}")
    for target in report["targets"]:
        status = "pass" if target["pass"] else "FAIL"
        if "ks" in target:
            print(f"  {target['kind']:14s} {status}  ks={target['ks']:.4f} "
                  f"(critical {target['ks_critical']:.4f}, "
                  f"threshold {target['ks_threshold']:.2f})")
        else:
            ratios = ", ".join(f"{row['ratio']:.3f}" for row in target["rows"])
            print(f"  {target['kind']:14s} {status}  "
                  f"mean-volume ratios: {ratios}")
    print(f"overall: {'pass' if report['pass'] else 'FAIL'}\n")


# --- passage-time law in the exponential regime --------------------------
# mu_2 sits 3.4 decades above its threshold (N mu_1)^2 / alpha, so the
# finite-size gap sigma_2 - sigma_1 is negligible on the beta_1 scale
law_model = ModelParams(d=1, L=1e4, alpha=1e4, mu=(3e-3, 225.0))
family = ScalingFamily(d=1, k=2, a=["-1/2", "1/2"], b=1)
law_report = run_validation(ValidationConfig(
    params=law_model,
    family=family,
    targets=({"kind": "sigma1_exact"}, {"kind": "sigma_k_law"}),
    replicates=400,
    master_seed=11,
))
show(law_report)

# --- occupied-volume diagnostic in a dilute model -------------------------
dilute_model = ModelParams(d=1, L=1000.0, alpha=1.0, mu=(1e-3, 1e-3))
volume_report = run_validation(ValidationConfig(
    params=dilute_model,
    targets=({"kind": "volume_diag", "times": [5.0, 10.0],
              "replicates": 80},),
    replicates=1,  # the diagnostic runs its own dedicated replicates
    master_seed=11,
))
show(volume_report)

print("reports are plain JSON, e.g. the law run starts with:")
print(json.dumps(law_report, indent=2, sort_keys=True)[:320], "...")
