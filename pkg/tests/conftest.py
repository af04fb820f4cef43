import sys

from hypothesis import settings

from ccx.simulator import SimConfig, run_ensemble

settings.register_profile("ccx", deadline=None)
settings.load_profile("ccx")


def ensemble(crn, observe, runs=40, seed=0, **config):
    cfg = SimConfig(seed=seed, observe=tuple(observe), **config)
    return run_ensemble(crn, cfg, runs)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
