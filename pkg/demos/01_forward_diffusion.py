"""Forward diffusion walkthrough: schedules, single steps, and the closed form.

Run:  python demos/01_forward_diffusion.py
"""

import numpy as np

from framebridge.diffusion import (
    LatentState,
    forward_marginal,
    forward_step,
    make_linear_schedule,
    save_schedule,
)

# A conventional linear schedule: 1000 steps, betas from 1e-4 to 0.02.
schedule = make_linear_schedule()
print(f"schedule length: {len(schedule)}")
print(f"alpha_1 = {schedule.alpha(1):.6f}, alpha_1000 = {schedule.alpha(1000):.6f}")
print(f"running product at t=100:  {schedule.alpha_bar(100):.6f}")
print(f"running product at t=1000: {schedule.alpha_bar(1000):.2e}")

# One noising step is just a weighted mix of signal and fresh noise.
x0 = LatentState(values=np.array([2.0, -1.0, 0.5]))
eps = np.array([0.3, -0.2, 0.8])
x1 = forward_step(x0, schedule.alpha(1), eps)
print(f"\nx0 = {x0.values}")
print(f"x1 = {x1.values}  (after one step)")

# Chaining t steps is equivalent in distribution to one closed-form jump.
# With the *same* aggregate noise budget the two coincide exactly at zero noise:
t = 250
jump = forward_marginal(x0, schedule, t, np.zeros(3))
print(f"\nzero-noise jump to t={t}: {jump.values}")
print(f"which is sqrt(abar_t) * x0 = {np.sqrt(schedule.alpha_bar(t)) * x0.values}")

# With real noise, the chain's sample statistics converge on the closed form.
rng = np.random.default_rng(0)
n = 5000
state = LatentState(values=np.tile(x0.values, n))
for step in range(1, t + 1):
    state = forward_step(state, schedule.alpha(step), rng.standard_normal(3 * n))
samples = state.values.reshape(n, 3)
abar = schedule.alpha_bar(t)
print(f"\nafter {n} chained walks to t={t}:")
print(f"  empirical mean {samples.mean(axis=0)}")
print(f"  target mean    {np.sqrt(abar) * x0.values}")
print(f"  empirical var  {samples.var(axis=0)}")
print(f"  target var     {1 - abar:.6f} (per component)")

# Schedules export as a plain text table, one alpha per line, for diffing
# against any other implementation.
save_schedule(schedule, "schedule_alphas.txt")
print("\nwrote schedule_alphas.txt (one alpha per line)")
