from analysis.export import export_plot_data, read_stretches, write_evaluation, write_stretches
from analysis.metrics import (Evaluation, MetricReport, boxplot_stats, evaluate_model, normalized_errors,
                              normalized_reaction_errors, vrmse)
from analysis.sinkhorn import default_epsilon, entropic_cost, sinkhorn_divergence
from analysis.stretches import StretchCloud, cell_stretches, stretch_cloud
