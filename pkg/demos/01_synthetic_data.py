"""Generate a random DAG, assign weights and noises, and sample data.

Run: python demos/01_synthetic_data.py
"""
import numpy as np

from sparse_lingam.synth import assign_weights_and_noises, gen_er_graph, gen_sf_graph, sample_data

er = assign_weights_and_noises(gen_er_graph(6, 6, seed=1))
print("ER graph, weighted adjacency (row = child, column = parent):")
print(np.round(er.B, 2))
print("noise kinds:", er.noise_kinds)

sf = gen_sf_graph(30, 1, seed=1)
degrees = (sf.B != 0).sum(axis=0) + (sf.B != 0).sum(axis=1)
print("scale-free tree: edges", sf.n_edges, "max degree", degrees.max())

data = sample_data(er, 2000)
print("sample shape", data.values.shape)
print("column variances", np.round(data.values.var(axis=0), 2))
