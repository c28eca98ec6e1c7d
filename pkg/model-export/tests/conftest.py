"""Prints one verdict line per exporter release criterion."""

CRITERIA = {
    "test_s01_synthetic_frames_parse_clean": (
        "S01",
        "3 synthetic frames export to files the consumer ingest parses with zero warnings",
    ),
    "test_s02_reference_table_accepted_by_calibrate": (
        "S02",
        "synthetic reference export is accepted by the consumer calibrate command",
    ),
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            name = report.nodeid.rsplit("::", 1)[-1]
            if name in CRITERIA:
                code, text = CRITERIA[name]
                verdict = outcome.upper().replace("ED", "")
                lines.append((code, f"{code} {verdict}: {text}"))
    if lines:
        terminalreporter.section("exporter criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
