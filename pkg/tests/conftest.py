import sys

import hypothesis

# Property tests must be as reproducible as the code they check: fixed
# example order, no wall-clock deadline (Monte Carlo cases vary in speed).
hypothesis.settings.register_profile(
    "det", derandomize=True, max_examples=50, deadline=None)
hypothesis.settings.load_profile("det")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdict lines, which capture would otherwise hide."""
    lines = []
    for name, module in sys.modules.items():
        if name.rpartition(".")[2] == "test_acceptance":
            lines = getattr(module, "_LINES", [])
            break
    if lines:
        terminalreporter.ensure_newline()
        terminalreporter.section("acceptance verdicts", sep="-")
        for line in lines:
            terminalreporter.write_line(line)
