"""Shared pytest wiring: a summary section listing each acceptance
criterion with an explicit PASS/FAIL line."""

CRITERIA = {
    "test_criterion_1_cost_model_ratios": "1 cost-model ratio reproduction",
    "test_criterion_2_feature_oracle": "2 feature oracle equivalence",
    "test_criterion_3_gradient_checks": "3 gradient correctness",
    "test_criterion_4_cd1_correctness": "4 CD-1 correctness",
    "test_criterion_5_condensation": "5 condensation consistency and reduction",
    "test_criterion_6_end_to_end_study": "6 end-to-end synthetic study",
    "test_criterion_7_determinism": "7 training and round-trip determinism",
    "test_criterion_8_baseline_sanity": "8 majority-baseline sanity",
}

_outcomes: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if name not in CRITERIA:
        return
    if report.when == "call" or report.outcome == "failed":
        previous = _outcomes.get(name)
        _outcomes[name] = "failed" if previous == "failed" else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name not in _outcomes:
            continue
        verdict = "PASS" if _outcomes[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {label}")
