from .model import ConditionalDensityModel, UnsupportedQueryError
from .estimator import KCDEstimator, make_estimator
