from ._version import __version__
from .kernels import *
from .dataset import *
from .spatial import *
from .likelihood import *
from .bandwidth import *
from .kcde_estimator import *
from .evalgen import *
from .config import *
from .utils import *
