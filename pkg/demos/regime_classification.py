"""Classify power-law parameter families into passage-time limit regimes.

Pin every model parameter to a power of the torus volume N: mutation
rates mu_i = N**a_i and spread rate alpha = N**b, with exact rational
exponents.  Every asymptotic hypothesis ("mu_2 is much larger than ...")
then becomes a strict inequality between rationals, so the classifier is
exact: it returns which limit law applies, on which beta time scale, or
reports a boundary tie / non-monotone family.

Run:  python demos/regime_classification.py
"""

from torusmut.regimes import L_INFINITE, ScalingFamily, classify, compute_l

families = [
    ("very slow first mutation", ScalingFamily(d=1, k=2, a=[-3, -3], b=1,
                                               c=[1.0, 1.0])),
    ("fast second mutation", ScalingFamily(d=1, k=2, a=["-1/2", "1/2"], b=1)),
    ("many-balls window", ScalingFamily(d=1, k=2, a=["-2/3", "-2/3"], b=0)),
    ("chain stops at l=2", ScalingFamily(d=1, k=3, a=["-4/5", 0, 1], b=0)),
    ("deciding tie", ScalingFamily(d=1, k=2, a=[-1, 0], b=1)),
    ("non-monotone rates", ScalingFamily(d=1, k=2, a=[1, 0], b=0)),
]

for name, family in families:
    regime = classify(family)
    l_text = "-"
    if regime.l is not None:
        l_text = "inf" if regime.l is L_INFINITE else str(regime.l)
    law = regime.law.to_dict() if regime.law else None
    scale = (f"{regime.scale_name} ~ N^{regime.scale_exponent}"
             if regime.scale_name else "-")
    print(f"{name:26s} a={[str(x) for x in family.a]} b={family.b}")
    print(f"{'':26s} -> {regime.kind:12s} l={l_text:4s} scale={scale}")
    print(f"{'':26s}    law={law}\n")

# the chain index l itself: largest j such that every type up to j still
# forms many balls before the next mutation type arrives
window = ScalingFamily(d=1, k=4, a=["-2/3"] * 4, b=0)
print("uniform window family, k=4: l =",
      "inf" if compute_l(window) is L_INFINITE else compute_l(window))
