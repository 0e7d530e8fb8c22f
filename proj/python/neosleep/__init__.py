"""Single-channel EEG sleep/wake pipeline: filtering, features, boosted trees."""

from neosleep._core import (
    Hyperparams,
    Model,
    cross_validate,
    feature_names,
    featurize,
    filter_response,
    filter_signal,
    generate_record,
    hjorth,
    load_model,
    model_from_json,
    train,
)

__all__ = [
    "Hyperparams",
    "Model",
    "cross_validate",
    "feature_names",
    "featurize",
    "filter_response",
    "filter_signal",
    "generate_record",
    "hjorth",
    "load_model",
    "model_from_json",
    "train",
]

__version__ = "0.1.0"
