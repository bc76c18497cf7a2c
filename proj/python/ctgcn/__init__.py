"""Causal discovery and graph-convolutional forecasting for multivariate
time series: PC-style lagged/contemporaneous link discovery with partial
correlation tests, DTW k-medoids feature clustering, vote aggregation into a
causal adjacency, and a temporal graph-convolutional forecaster."""

try:
    from . import _ctgcn as _impl
except ImportError:  # build-tree layout: the extension sits on sys.path
    import _ctgcn as _impl

CausalAdjacency = _impl.CausalAdjacency
Clustering = _impl.Clustering
ConfigError = _impl.ConfigError
DataError = _impl.DataError
InsufficientDataError = _impl.InsufficientDataError
NormalizationStats = _impl.NormalizationStats
StageError = _impl.StageError
TimeSeriesDataset = _impl.TimeSeriesDataset
adjacency_scores = _impl.adjacency_scores
cluster_features = _impl.cluster_features
discover = _impl.discover
distance_adjacency = _impl.distance_adjacency
dtw_distance = _impl.dtw_distance
generate_diffusion = _impl.generate_diffusion
generate_scm = _impl.generate_scm
load_csv = _impl.load_csv
run_pipeline = _impl.run_pipeline
to_undirected = _impl.to_undirected
train_forecaster = _impl.train_forecaster
write_csv = _impl.write_csv
zscore_normalize = _impl.zscore_normalize

__all__ = [
    "CausalAdjacency",
    "Clustering",
    "ConfigError",
    "DataError",
    "InsufficientDataError",
    "NormalizationStats",
    "StageError",
    "TimeSeriesDataset",
    "adjacency_scores",
    "cluster_features",
    "discover",
    "distance_adjacency",
    "dtw_distance",
    "generate_diffusion",
    "generate_scm",
    "load_csv",
    "run_pipeline",
    "to_undirected",
    "train_forecaster",
    "write_csv",
    "zscore_normalize",
]
