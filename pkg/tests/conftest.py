"""Shared pytest plumbing: collects acceptance-criterion verdicts and
prints one pass/fail line per criterion in the terminal summary."""

_ACCEPTANCE = []


def record_acceptance(label, ok):
    _ACCEPTANCE.append((label, bool(ok)))
    return bool(ok)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in _ACCEPTANCE:
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'}")
