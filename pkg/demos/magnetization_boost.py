"""Convert pumped singlet order back into enhanced magnetization.

From the even-count pumped steady state, one further triplet reset followed
by a singlet/|aa> population swap turns the accumulated singlet order into
Zeeman order.  Ideally the magnetization ends 3/2 above its thermal value,
i.e. the spins behave as if equilibrated at 2/3 of the bath temperature.
"""

from singletcool import (
    SpinSystemParams,
    ZEEMAN_ORDER,
    enhance_zeeman,
    epsilon,
    ideal_steady_state,
    measure_order,
    run_kinetic,
    thermal_populations,
    zeeman_enhancement_ratio,
)

params = SpinSystemParams()
eps = epsilon(params)
zo_eq = measure_order(thermal_populations(eps), ZEEMAN_ORDER)

enhanced = enhance_zeeman(ideal_steady_state(eps), eps)
ideal_ratio = measure_order(enhanced, ZEEMAN_ORDER) / zo_eq
print(f"ideal engine:   ZO_final / ZO_eq = {ideal_ratio:.6f}")
print(f"                effective spin temperature = {1 / ideal_ratio:.4f} x bath")

ratio = zeeman_enhancement_ratio(6, 28.0, 18.0, params)
print(f"kinetic engine: ZO_final / ZO_eq = {ratio:.6f}  (n_p = 6, tau = 28 s, tau' = 18 s)")
print(f"                effective spin temperature = {1 / ratio:.4f} x bath")
print()

print("the final reset duration tau' trades freshness of the triplet")
print("polarization against singlet leakage, separately from the pump delay:")
print("  tau' / s    ZO_final / ZO_eq")
for tau_prime in (2.0, 6.0, 12.0, 18.0, 28.0, 60.0):
    r = zeeman_enhancement_ratio(6, 28.0, tau_prime, params)
    print(f"   {tau_prime:6.1f}    {r:.6f}")

res = run_kinetic(6, 28.0, 0.0, params, enhance=True, tau_prime=18.0)
print()
print(f"populations after the pump: {res.populations_after_pump.p}")
