# %% [markdown]
# # Outcome models
#
# Every rating engine talks to the data through one scalar function: the
# log-probability of a game result given the (scaled, boosted) skill
# difference `z`. Its first derivative `g` drives the mean update and its
# negated second derivative `h` drives the variance update.

# %%
import numpy as np

from skfrating.models import (
    ModelKind,
    ModelSpec,
    davidson_expected_score,
    derivatives,
    logistic10,
    outcome_probabilities,
)

thurston = ModelSpec(ModelKind.THURSTON)
bt = ModelSpec(ModelKind.BRADLEY_TERRY)
davidson = ModelSpec(ModelKind.DAVIDSON, kappa=0.67)

# %% [markdown]
# Probabilities over the outcome alphabet. Binary models have (away win,
# home win); the Davidson model adds a draw in the middle.

# %%
z = np.array([-1.0, 0.0, 0.5, 2.0])
for name, m in (("thurston", thurston), ("bradley-terry", bt), ("davidson", davidson)):
    print(f"{name:>14}", np.round(outcome_probabilities(m, z), 4).tolist())

# %% [markdown]
# `g` and `h` along a grid. `h` stays nonnegative everywhere, which keeps
# posterior variances from growing on an update.

# %%
grid = np.linspace(-4, 4, 9)
d = derivatives(bt, grid, 1)
print("z  ", grid.tolist())
print("g  ", np.round(d.gradient, 4).tolist())
print("h  ", np.round(d.hessian_neg, 4).tolist())

# %% [markdown]
# The Thurston derivatives stay finite even for absurd mismatches, thanks
# to a scaled complementary error function.

# %%
far = derivatives(thurston, np.array([-50.0, -300.0]), 1)
print("g:", far.gradient, "h:", far.hessian_neg)

# %% [markdown]
# With draws switched off (`kappa = 0`) or set to 2, the Davidson expected
# score collapses onto the logistic curve.

# %%
zz = np.linspace(-3, 3, 7)
print(np.max(np.abs(davidson_expected_score(zz / 2, 0.0) - logistic10(zz))))
print(np.max(np.abs(davidson_expected_score(zz, 2.0) - logistic10(zz))))
