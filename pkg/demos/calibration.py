# %% [markdown]
# # Fitting the weight constants
#
# A reference policy labels random satisfaction vectors with the need that
# should win. The search looks for constants whose weights agree on every
# sample.

# %%
import numpy as np

from needmind import calibration as cal
from needmind.needs import NeedHierarchy, WeightParams
from needmind.scenario import print_params

samples = cal.generate_samples(seed=0, n=100)
hierarchy = NeedHierarchy.default()
print("hand-set defaults score", cal.score(WeightParams.default(), hierarchy, samples), "/ 100")

# %%
result = cal.calibrate(samples, budget=10_000, seed=0)
print(f"best score {result.score}/100 after {len(result.history)} candidates")
print(print_params(result.params))

# %% [markdown]
# How close the closest call is: the winning need's lead over the runner-up.

# %%
sats, labels = cal.sample_matrix(samples)
lead = cal.margins(result.params, hierarchy, sats, labels)
print("smallest lead", lead.min().round(4), "median lead", np.median(lead).round(4))

# %% [markdown]
# Score over the course of the search.

# %%
scores = np.array([c.score for c in result.history])
for k in (1, 10, 100, len(scores)):
    print(f"after {k:5d} candidates: {scores[:k].max():.0f}")
