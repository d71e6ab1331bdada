# %% [markdown]
# # Eigendecomposition cost versus graph size
#
# Dense solves grow roughly cubically, which is what makes clustering a
# small robust subset cheaper than clustering everything.

# %%
from spadecluster import build_knn_graph, laplacian, make_blobs
from spadecluster.eigen import bottom_nonzero_eigenpairs, dense_eig_oracle, timed

for n in (250, 500, 1000, 2000):
    ps = make_blobs(n // 10, 10, 10, 0.3, seed=0)
    lap = laplacian(build_knn_graph(ps, 10))
    _, t_dense = timed(dense_eig_oracle, lap.toarray())
    _, t_iter = timed(bottom_nonzero_eigenpairs, lap, 10, method="iterative")
    print(f"n={n:5d}  dense {t_dense:7.3f}s  iterative (10 pairs) {t_iter:7.3f}s")
