# %% [markdown]
# # Two friends
#
# Bob sees further than Alice. When a predator enters his view he shouts a
# warning; he stays near her while his worry for her outweighs his own fear
# and only runs once she is safe.

# %%
from needmind import load_scenario, run
from needmind import milestones as ms
from needmind.needs import Need
from needmind.trace import format_digest, summarize

config = load_scenario("double_agent")
trace = run(config)
print(format_digest(summarize(trace)))

# %%
views = {a.name: a.view_radius for a in config.agents}
m = ms.double_agent(trace, config.params, config.hierarchy, views, [p.name for p in config.predators])
print(m)

# %% [markdown]
# While Bob is in her view, Alice's friendship satisfaction follows the
# predator's distance to him; out of view it could only recover.

# %%
from needmind.world import distance

friendship = dict(trace.samples("alice", Need.FRIENDSHIP))
for slot in range(m.bob_sees_predator or 0, (m.bob_safe or len(friendship)) + 1, 3):
    where = trace.positions[slot]
    apart = distance(where["alice"], where["bob"])
    print(f"slot {slot:2d}  alice-bob {apart:5.1f} (alice sees {views['alice']:g})  alice friendship {friendship[slot]:5.2f}")
