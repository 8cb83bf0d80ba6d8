import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, limit): acceptance criterion k with a runtime limit in seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    mark = item.get_closest_marker("criterion")
    t0 = time.perf_counter()
    outcome = yield
    if mark is None:
        return
    k = mark.args[0]
    limit = mark.kwargs.get("limit")
    elapsed = time.perf_counter() - t0
    ok = outcome.excinfo is None
    detail = dict(item.user_properties).get("detail", "")
    if ok and limit is not None and elapsed > limit:
        ok = False
        detail = f"{detail}; runtime {elapsed:.1f}s exceeds {limit}s".lstrip("; ")
    if outcome.excinfo is not None:
        detail = f"{detail}; {outcome.excinfo[0].__name__}: {str(outcome.excinfo[1]).splitlines()[0] if str(outcome.excinfo[1]) else ''}".lstrip("; ")
    _RESULTS[k] = {"ok": ok, "elapsed": elapsed, "limit": limit, "detail": detail}
    if ok is False and outcome.excinfo is None:
        outcome.force_exception(AssertionError(f"criterion {k}: runtime {elapsed:.1f}s exceeds {limit}s"))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        r = _RESULTS[k]
        status = "PASS" if r["ok"] else "FAIL"
        lim = f" (limit {r['limit']}s)" if r["limit"] else ""
        terminalreporter.write_line(f"criterion {k:>2}: {status}  {r['elapsed']:.2f}s{lim}  {r['detail']}")
