from .featfile import (CANONICAL_LENGTH, FeatureVector, dump_feature_text,
                       load_cnn_features, load_feature_text,
                       read_feature_file, write_feature_file)
from .hog import HogParams, hog, hog_dimension
from .image import GrayImage, resize, to_gray
from .lbp import LbpParams, lbp, lbp_codes
