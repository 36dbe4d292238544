# %% [markdown]
# # Alice, the prey and two predators
#
# Alice starts hungry enough to notice within a slot. A prey animal grazes
# 13 units away, and two predators rest 32 units off, just outside her view.
# We watch what wins her attention slot by slot.

# %%
import numpy as np

from needmind import load_scenario, run
from needmind import milestones as ms
from needmind.needs import Need
from needmind.trace import format_digest, summarize

config = load_scenario("single_agent")
trace = run(config)
print(format_digest(summarize(trace)))

# %% [markdown]
# The milestones pick out the story: hunger wins first, the hunt starts,
# safety dips below threshold while food still outweighs it, she eats, and
# only then runs.

# %%
m = ms.single_agent(trace, config.params, config.hierarchy)
print(m)
print("story in order:", m.order_ok())

# %% [markdown]
# Satisfaction curves for the two needs that fight over her.

# %%
energy = np.array([v for _, v in trace.samples("alice", Need.ENERGY)])
safety = np.array([v for _, v in trace.samples("alice", Need.PERSONAL_SAFETY)])
for slot in range(0, len(energy), 10):
    print(f"slot {slot:2d}  energy {energy[slot]:5.2f}  safety {safety[slot]:5.2f}")
print("lowest safety", safety.min().round(2), "at slot", int(safety.argmin()))
