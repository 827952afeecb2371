"""Pedestrian action and crossing-intention estimation pipeline."""

from .dataset import (BehaviorLabels, BoundingBox, Dataset, Demographics,
                      PedestrianSample, SceneContext, Split, balance_classes,
                      crop_region, load_annotations, split_by_clip,
                      split_by_frame, write_annotations)
from .errors import DataError, NumericalError, PedintentError, UsageError
from .features.featfile import (FeatureVector, load_cnn_features,
                                read_feature_file, write_feature_file)
from .features.hog import HogParams, hog, hog_dimension
from .features.image import GrayImage, resize, to_gray
from .features.lbp import LbpParams, lbp
from .intent import (VARIABLES, IntentModel, IntentSample, SelectionTrace,
                     encode, encode_many, forward_select, intent_samples,
                     predict_crossing, train_intent)
from .learners import Classifier, make_trainer

__version__ = "0.1.0"
