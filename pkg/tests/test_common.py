
def test_toolbox():
    # import test
    from pysbfd.toolbox import RandomStreams, run_trials, sweep_inr, evaluate_ul, parse_pattern, esprit_phases
