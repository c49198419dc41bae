"""Shared pytest hooks: acceptance verdicts are echoed in the terminal summary."""

ACCEPTANCE = {}
N_CRITERIA = 10


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    ran = any(
        "test_acceptance" in rep.nodeid
        for key in ("passed", "failed", "error")
        for rep in terminalreporter.stats.get(key, [])
    )
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: FAIL | not evaluated (test errored or was deselected)")
