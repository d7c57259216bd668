"""Verdict lines collected by the acceptance tests and echoed in the terminal summary."""

LINES: dict[int, str] = {}


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    LINES[number] = line
    print(line)
