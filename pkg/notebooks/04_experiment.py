# %% [markdown]
# # A config-driven experiment
#
# The same comparison the command line runs, driven from Python. Point
# ``dataset.path`` at ``usps.csv`` or the MNIST test IDX files to reproduce
# the digit benchmarks.

# %%
from spadecluster.cli import format_report
from spadecluster.pipeline import ExperimentConfig, run_experiment

cfg = ExperimentConfig.from_text("""
dataset.kind = blobs
dataset.name = blobs-demo
blobs.n_per_cluster = 200
blobs.spread = 0.08
blobs.noise_dims = 6
k_clusters = 3
k_nn = 10
m_nodes = 200
seed = 3
""")
report = run_experiment(cfg)
print(format_report(report))
print(report.to_text())
