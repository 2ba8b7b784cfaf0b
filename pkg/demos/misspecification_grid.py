"""Double robustness in action: the four-case misspecification grid.

Every generated trial carries an extra column ``xtilde``, a fixed nonlinear
distortion of the education column.  A "wrong" working model is one that
regresses on xtilde alone instead of the true covariates; the data never
change.  The DR estimator stays near the truth whenever at least one of its
two working models is right.
"""

from tridiff import default_dgp_spec, run_monte_carlo

SUITE = ("cdatt_ra", "cdatt_ipw", "cdatt_dr")
CASES = (
    ("1. both correct ", {}),
    ("2. propensity wrong", {"ps_wrong": True}),
    ("3. outcome wrong ", {"or_wrong": True}),
    ("4. both wrong    ", {"ps_wrong": True, "or_wrong": True}),
)

print("average bias of the causal contrast (truth 0), 200 trials x n=800\n")
print(f"{'case':<22} {'ra':>8} {'ipw':>8} {'dr':>8}")
for label, flags in CASES:
    spec = default_dgp_spec(n=800, **flags)
    report = run_monte_carlo(spec, suite=SUITE, trials=200, master_seed=20250101)
    biases = [report.row(name, 2, 2)["avg_bias"] for name in SUITE]
    print(f"{label:<22} " + " ".join(f"{b:+8.4f}" for b in biases))

print(
    "\nreading: RA needs the outcome model, IPW needs the propensity model,"
    "\nDR survives either one being wrong (cases 2 and 3) and only breaks"
    "\nwhen both are (case 4)."
)
