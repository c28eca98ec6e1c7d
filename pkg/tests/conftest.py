"""Shared test hooks: a per-criterion summary for the acceptance suite."""

CRITERIA = {
    "test_a01_half_normal_p_closed_form": (
        "A01",
        "half-normal P-hat matches the closed form within 1e-8 in under 1 s",
    ),
    "test_a02_bin_probabilities_normalize": (
        "A02",
        "1,000 random feasible models: bin probabilities sum to 1 within 1e-12",
    ),
    "test_a03_mle_matches_grid_oracle": (
        "A03",
        "10,000-distance half-normal fit: sigma in [3.8, 4.2], log-likelihood "
        "within 1e-3 of the grid-search oracle, under 10 s",
    ),
    "test_a04_estimator_consistency": (
        "A04",
        "100-camera simulated survey: |D-hat - D|/D < 0.05 and the half-normal "
        "family wins selection, under 2 min",
    ),
    "test_a05_bootstrap_coverage": (
        "A05",
        "100 repetitions, B=200: 95% bootstrap CI covers truth in >= 85, "
        "deterministic per seed, under 30 min",
    ),
    "test_a06_abundance_density_rows": (
        "A06",
        "abundance follows density times the fixed area for every reference "
        "row within 1.5% under 2-decimal rounding of density",
    ),
    "test_a07_relative_difference_headline": (
        "A07",
        "abundance comparison 1917 vs 2454 lands within 22% (21.9%)",
    ),
    "test_a08_error_metric_identities": (
        "A08",
        "|delta-avg| <= MAE <= RMSE on 10,000 random paired sets; hand "
        "example gives (1.5, 1.5811, -0.5)",
    ),
    "test_a09_distance_rule_fixtures": (
        "A09",
        "20th percentile of 1..100 is 20.8; mask-centre fallback matches "
        "brute force on 500 random concave masks",
    ),
    "test_a10_format_round_trips": (
        "A10",
        "PFM and PGM round-trip bit-exact on 1,000 random maps",
    ),
    "test_a11_cli_determinism": (
        "A11",
        "ctds and simulate commands rerun byte-identically for a fixed seed, "
        "whatever the worker count",
    ),
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            name = report.nodeid.split("::")[-1]
            if name in CRITERIA:
                code, text = CRITERIA[name]
                lines.append((code, outcome.upper().replace("ED", ""), text))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for code, verdict, text in sorted(lines):
        terminalreporter.write_line(f"{code} {verdict}: {text}")
