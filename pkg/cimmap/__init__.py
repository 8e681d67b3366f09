from .errors import *
from .mapping import *
from .oracle import *
from .parser import *
from .report import *
from .smt import smt
from .template import *
