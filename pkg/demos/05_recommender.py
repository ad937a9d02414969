"""Walk the recommender across workload profiles and print rationale paths.

Run: python demos/05_recommender.py
"""

from sortsax import WorkloadProfile, recommend

GB = 1 << 30

profiles = [
    ("static exploration, few queries",
     WorkloadProfile(mode="static", dataset_bytes=4 * GB,
                     memory_budget_bytes=GB, expected_query_count=20)),
    ("static exploration, heavy query load",
     WorkloadProfile(mode="static", dataset_bytes=4 * GB,
                     memory_budget_bytes=GB, expected_query_count=500_000)),
    ("live stream with mixed windows",
     WorkloadProfile(mode="streaming", dataset_bytes=4 * GB,
                     memory_budget_bytes=GB, expected_query_count=1_000,
                     update_rate=2_000.0, window_profile="mixed")),
]

for title, profile in profiles:
    rec = recommend(profile)
    print(f"=== {title}")
    print(f"    -> {rec.index}, {'materialized' if rec.materialized else 'non-materialized'}, "
          f"{rec.strategy}  (break-even queries: {rec.break_even_queries})")
    for step, text in enumerate(rec.rationale, 1):
        print(f"    {step}. {text}")
    print()
