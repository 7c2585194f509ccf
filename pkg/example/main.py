import sys

sys.path.append('../src')

from pdm_slater import Constants, PDMModel, pct_exact_slater, slater_sum, slater_sum_v_form

constants = Constants(hbar=0.1)
model = PDMModel.pct(0.6, 1.0, constants)

print(f"{'x':>6} {'leading':>12} {'total':>12} {'v-form':>12} {'exact':>12}")
for x in (0.0, 0.5, 1.0, 2.0):
    r = slater_sum(model, x, 1.0)
    exact = float(pct_exact_slater(x, 1.0, 0.6, 1.0, constants))
    print(f"{x:6.2f} {r.leading:12.8f} {r.total:12.8f} {slater_sum_v_form(model, x, 1.0):12.8f} {exact:12.8f}")

bump = PDMModel.from_expressions("1 + 0.3*exp(-(x^2 + y^2))", "(x^2 + y^2)/2", dim=2, constants=constants)
print(slater_sum(bump, [0.5, -0.5], 1.0))
