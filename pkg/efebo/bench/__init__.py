from ._benchmark import AggregateReport as AggregateReport
from ._benchmark import MethodSummary as MethodSummary
from ._benchmark import RunFailure as RunFailure
from ._benchmark import ScatterPoint as ScatterPoint
from ._benchmark import run_benchmark as run_benchmark
from ._checks import CheckResult as CheckResult
from ._checks import run_theory_checks as run_theory_checks
from ._config import BenchmarkConfig as BenchmarkConfig
from ._config import RunTemplate as RunTemplate
from ._config import VdpDemoConfig as VdpDemoConfig
from ._config import load_config as load_config
from ._export import export as export
from ._export import export_vdp as export_vdp
from ._export import load_report as load_report
from ._vdp import VdpDemoResult as VdpDemoResult
from ._vdp import run_vdp_demo as run_vdp_demo
