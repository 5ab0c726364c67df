import os

import pytest

_VERDICTS: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        verdict = "PASS" if report.passed else "FAIL"
        _VERDICTS[number] = (verdict, title)
        print(f"\n[{verdict}] criterion {number}: {title}")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        verdict, title = _VERDICTS[number]
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title}")


@pytest.fixture(scope="session")
def tg36_csv(tmp_path_factory):
    """400 repetitions per algorithm on the TG graph with 36 vertices, written through the CLI."""
    from sdrls.cli import main

    out = tmp_path_factory.mktemp("tg36") / "tg36.csv"
    argv = ["sweep", "--problem", "mst", "--graph", "tg", "--n", "36",
            "--algos", "sd-rls-star,ea,rls12", "--reps", "400", "--budget", "1e8",
            "--seed", "36", "--out", str(out), "--workers", str(os.cpu_count() or 1),
            "--no-timing", "--id", "tg36"]
    assert main(argv) == 0
    return out
