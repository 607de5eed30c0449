"""
Clustering of training data and zero-shot routing of test utterances to
component models.
"""


from .clustering import (
    build_cluster_spec,
    cluster_by_qe,
    cluster_by_qs,
    load_cluster_spec,
    save_cluster_spec,
)
from .kmeans import ClusterError, KMeansResult, kmeans
from .schemas import ClusterSpec, KMeansConfig, Strategy
from .select import (
    SelectionError,
    qe_distances,
    qs_distances,
    select_model_qe,
    select_model_qs,
)
