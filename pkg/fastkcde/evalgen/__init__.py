from .generators import *
from .metrics import *
from .cross_validation import *
