import re

CRITERIA = {
    1: "chain validity of every builder",
    2: "Heisenberg quotient sizes",
    3: "odometer freeness and LQA",
    4: "Grigorchuk LQA witness and ascending chain",
    5: "kernel normality contrast",
    6: "orbit-equivalence certificate for the product toys",
    7: "twist construction",
    8: "return equivalence",
    9: "full-group algebra",
    10: "CLI determinism",
}

_results = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if failed:
        _results[n] = "FAIL"
    elif report.when == "call":
        _results.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        status = _results.get(n, "NOT RUN")
        terminalreporter.write_line(f"criterion {n:2d} {status:7s} {title}")
