__version__ = "0.1.0"

from .acquisition import AcquisitionKind as AcquisitionKind
from .acquisition import AcquisitionSpec as AcquisitionSpec
from .acquisition import EfePreference as EfePreference
from .engine import RunConfig as RunConfig
from .engine import RunRecord as RunRecord
from .engine import run as run
from .gp import Dataset as Dataset
from .gp import GpConfig as GpConfig
from .gp import GpModel as GpModel
from .gp import Grid as Grid
from .gp import Posterior as Posterior
from .gp import fit as fit
