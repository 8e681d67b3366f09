from .geometry import *
from .metrics import *
from .policy import *
from .baselines import *
from .tetris import *
from .grouping import *
from .registry import *
from .macro import *
