from .channel import EchoParams, InterferenceSpec
from .grid import FrameConfig, SubbandMap, build_map, parse_pattern, validate_numerology
from .harness import RmseReport, SweepReport, run_trials, sweep_inr
from .scenario import ScenarioConfig, default_paper_scenario, load_scenario
from .uplink import UlResult, evaluate_ul

VERSION = (0, 1, 0)
"""Application version number tuple."""

VERSION_STR = '.'.join(map(str, VERSION))
"""Application version number string."""
