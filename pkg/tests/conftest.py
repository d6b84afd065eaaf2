CRITERIA = {
    1: "golden counterexample replay",
    2: "MetaMSN suites over second price, MPA, LOS",
    3: "MetaMSN-m over DNS with fixed coins",
    4: "non-sensitivity of LOS, second price, MPA; DNS counterexample",
    5: "welfare at least the first-neighbourhood optimum",
    6: "configuration LP correctness",
    7: "experiment ordering FIRST <= meta <= ALL",
    8: "byte-identical CSV on rerun",
    9: "star-network reduction",
}

_results: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = next((k for k in report.keywords if k.startswith("criterion_")), None)
    if marker is None:
        return
    n = int(marker.split("_")[1])
    _results.setdefault(n, []).append((report.nodeid.split("::")[-1], report.outcome))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.keywords[f"criterion_{m.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _results.get(n)
        if not runs:
            continue
        ok = all(outcome == "passed" for _, outcome in runs)
        failed = [name for name, outcome in runs if outcome != "passed"]
        extra = f"  (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {CRITERIA[n]}{extra}")
