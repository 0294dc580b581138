"""
Correlating the two tracks on the bundled 17-model benchmark
============================================================

The package ships a fixture of 17 encoders with both tracks' accuracies
and runtimes. If the cheap similarity numbers rank models like the
expensive fine-tuned numbers do, the fast track is a usable screen.
"""

from abductrank import correlate_runs, read_runs_csv, table1_fixture_path

runs = read_runs_csv(table1_fixture_path())
print(f"loaded {len(runs)} model runs from {table1_fixture_path().name}")

report = correlate_runs(runs)
print(f"pearson  r   = {report.pearson_r:.5f}  (p = {report.pearson_p:.5f})")
print(f"spearman rho = {report.spearman_rho:.5f}  (p = {report.spearman_p:.5f})")
print(f"mean speedup = {report.mean_speedup:.1f}x")

# Rank by the fast track and see where the best fine-tuned models land.
ranked = sorted(runs, key=lambda run: -run.sim_accuracy)
print("\nfast-track ranking (top 5):")
for pos, run in enumerate(ranked[:5], start=1):
    print(f"  {pos}. {run.model_id:<36} sim {run.sim_accuracy:.2f}  "
          f"clf {run.clf_accuracy:.2f}")

best_clf = max(runs, key=lambda run: run.clf_accuracy)
fast_rank = 1 + [r.model_id for r in ranked].index(best_clf.model_id)
print(f"\nbest fine-tuned model ({best_clf.model_id}) sits at "
      f"fast-track rank {fast_rank} of {len(runs)}")
