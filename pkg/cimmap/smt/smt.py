from .pysmt import *
