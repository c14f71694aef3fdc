import os
import sys
import time

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
    elapsed = time.perf_counter() - _START
    verdict = "PASS" if elapsed < 60 else "FAIL"
    terminalreporter.write_line(
        f"criterion  9 (suite runtime): {verdict}  full suite {elapsed:.1f} s (< 60 s)")
