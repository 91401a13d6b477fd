"""Pairwise human-preference aggregation: votes in, per-dimension percentages out.

Run:  python demos/04_preference_aggregation.py
"""

import numpy as np

from framebridge.preferences import (
    DIMENSIONS,
    PreferenceVote,
    aggregate_preferences,
    format_percent,
    votes_to_csv,
)

rng = np.random.default_rng(2)

# Simulate 50 items judged by 10 participants along all three dimensions,
# with a model that wins motion clearly, alignment solidly, and visuals barely.
win_rates = {"visual_quality": 0.52, "motion_quality": 0.68, "text_video_alignment": 0.62}
tie_rate = 0.1

votes = []
for item in range(50):
    for judge in range(10):
        for dimension in DIMENSIONS:
            roll = rng.random()
            if roll < tie_rate:
                choice = "tie"
            elif rng.random() < win_rates[dimension]:
                choice = "ours"
            else:
                choice = "baseline"
            votes.append(PreferenceVote(item_id=f"item{item:02d}",
                                        dimension=dimension, choice=choice))

print(f"collected {len(votes)} votes "
      f"({sum(1 for v in votes if v.choice == 'tie')} ties, excluded from denominators)\n")

result = aggregate_preferences(votes)
print(f"{'dimension':<24}  preference for ours")
for dimension in DIMENSIONS:
    print(f"{dimension:<24}  {format_percent(result[dimension])}")

# Votes serialize to a three-column CSV for archiving.
print("\nfirst lines of the votes file:")
print("\n".join(votes_to_csv(votes).splitlines()[:4]))
