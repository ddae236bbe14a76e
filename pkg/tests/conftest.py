"""Collects the acceptance verdict lines and prints them after the run."""

VERDICTS: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> bool:
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion} {title}: {detail}")
    return ok


def note(text: str) -> None:
    VERDICTS.append(f"       {text}")


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
