"""Intention-aware vehicle trajectory prediction with two LSTM networks.

A 64-cell network classifies lane keeping versus left or right lane change
from a 5 s history window; a 128-cell network then regresses 5 s of future
acceleration and lateral deviation from the implied target lane, which are
integrated back into positions.
"""

__version__ = "0.1.0"

from .dataset import DataError, SampleSet, SynthConfig, Track, parse_trajectory_file, slice_windows, synth_generate
from .geometry import LaneGeometry
from .intention import classify, init_intention_model
from .lstm import ContractError, GradientExplosionError, SequenceModel, bptt, grad_check
from .trajectory import init_trajectory_model, predict, predict_batch
from .training import HyperConfig, evaluate_lead_times, evaluate_rmse, train_intention, train_trajectory

__all__ = [
    "ContractError", "DataError", "GradientExplosionError", "HyperConfig", "LaneGeometry",
    "SampleSet", "SequenceModel", "SynthConfig", "Track", "bptt", "classify",
    "evaluate_lead_times", "evaluate_rmse", "grad_check", "init_intention_model",
    "init_trajectory_model", "parse_trajectory_file", "predict", "predict_batch",
    "slice_windows", "synth_generate", "train_intention", "train_trajectory",
]
