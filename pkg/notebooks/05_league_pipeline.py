# %% [markdown]
# # From a results file to a forecast report
#
# League results come in as a plain CSV:
# `date,home,away,home_score,away_score[,reg_home_score,reg_away_score]`.
# The bundled 20-game season in `tests/data` stands in for real data here;
# point `SEASONS` at your own files for the real thing.

# %%
import os
from pathlib import Path

from skfrating import Algorithm, DynamicsParams, EngineConfig, ModelKind, ModelSpec
from skfrating.evaluation import (
    OutcomeFrequencies,
    entropy,
    estimate_hfa_binary,
    evaluate_seasons,
    season_log_scores,
)
from skfrating.ingest import parse_season

root = Path(__file__).resolve().parent.parent if "__file__" in globals() else Path.cwd()
default = root / "tests" / "data" / "golden_season.csv"
SEASONS = [Path(p) for p in os.environ.get("SKFRATING_SEASONS", str(default)).split(os.pathsep)]
seasons = [parse_season(p, "binary_final") for p in SEASONS]
print({s.source: (s.M, s.T) for s in seasons})

# %% [markdown]
# Home advantage from the home-win frequency, and the entropy a constant
# forecast would score.

# %%
freqs = OutcomeFrequencies.from_outcomes([y for s in seasons for y in s.outcomes()], 2)
eta = estimate_hfa_binary(freqs.values)
print("frequencies", freqs.values, "eta", round(eta, 4), "entropy", round(entropy(freqs), 4))

# %%
model = ModelSpec(ModelKind.BRADLEY_TERRY, hfa=eta)
cfg = EngineConfig(Algorithm.VSKF, model, DynamicsParams(1.0, 3e-5), v0=0.01)
print("per-game log-scores:", [round(float(x), 3) for x in season_log_scores(cfg, seasons[0].games, seasons[0].M)[:8]])
print("(ls_init, ls_final):", evaluate_seasons(cfg, seasons))

# %% [markdown]
# The same run from the shell, with a manifest that reproduces it:
#
# ```
# skfrating evaluate --seasons tests/data/golden_season.csv \
#     --engines vskf:v0=0.01,eps=3e-5 sg:K=0.01 freq --out report/
# skfrating evaluate --config report/manifest.txt --out report2/
# ```
