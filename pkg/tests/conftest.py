"""Shared pytest wiring: prints a one-line verdict per acceptance criterion."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                name = nodeid.split("::")[-1]
                lines[name] = outcome.upper().replace("PASSED", "PASS")
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(lines):
        verdict = {"PASSED": "PASS", "FAILED": "FAIL", "ERROR": "FAIL"}.get(
            lines[name], lines[name])
        terminalreporter.write_line(f"{name}: {verdict}")
