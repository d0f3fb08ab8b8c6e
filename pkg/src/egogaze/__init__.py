"""Training-free gaze prediction and event segmentation for egocentric video.

The engine tiles each frame with an N x N lattice of feature generators,
scores temporal bond energies against the recent past, and reads the
per-cell aggregate as surprise: its argmax region drives gaze prediction,
its global sum drives event segmentation.
"""

__version__ = "0.1.0"

from .energy import EnergyParams, bond_energy, configuration_energy
from .errors import EgoGazeError
from .evalkit import CameraModel, GazeRecord, aae, hungarian, kmeans, segmentation_accuracy
from .features import FeatureScheme, Frame, feature_config
from .lattice import Configuration, GridGeometry, build_geometry
from .pipeline import GazePipeline, RunConfig, process_stream
from .predictor import GazePrediction, PredictorParams, center_bias, predict_gaze
from .segmenter import EventBoundary, GatingParams, Segmenter
from .temporal import HistoryBuffer, SurpriseMap, decay_weights, temporal_aggregate

__all__ = [
    "__version__",
    "EgoGazeError",
    "GridGeometry", "Configuration", "build_geometry",
    "FeatureScheme", "Frame", "feature_config",
    "EnergyParams", "bond_energy", "configuration_energy",
    "HistoryBuffer", "SurpriseMap", "decay_weights", "temporal_aggregate",
    "PredictorParams", "GazePrediction", "center_bias", "predict_gaze",
    "GatingParams", "Segmenter", "EventBoundary",
    "CameraModel", "GazeRecord", "aae", "kmeans", "hungarian",
    "segmentation_accuracy",
    "RunConfig", "GazePipeline", "process_stream",
]
