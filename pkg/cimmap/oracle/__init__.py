from .coverage import *
from .brute import *
