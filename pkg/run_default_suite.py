from vlex_multipliers.oracle import SuiteConfig, run_property_suite
from vlex_multipliers.utils import get_logger


OPTIONS = {
        "seed": 1234,
        "threads": 4,
        'suite': {
            'size': 32,
            'mollification_size': 64,
            'deltas': [1.0, 0.5, 0.25, 0.125],
            'restarts': 4,
            'max_iters': 100,
            'convergence_sizes': [16, 64],
            'interpolation': {'count': 10, 'variable': True},
        },
        "csv": "default_suite.csv",
    }

def run_suite():
    config = SuiteConfig.from_dict(OPTIONS["suite"], OPTIONS["seed"])
    report = run_property_suite(config, threads=OPTIONS["threads"])
    for row in report.violations:
        get_logger(__name__).error(f"{row.case_id} {row.check}: {row.lhs:.9g} > {row.rhs:.9g}")
    for row in report.misses:
        print(f"Missed target: {row.case_id} {row.check}, margin {row.margin:.3g}")
    report.write_csv(OPTIONS["csv"])
    return report

if __name__ == "__main__":
    report = run_suite()
    print(f"{len(report.rows)} rows, {len(report.violations)} violations, {len(report.misses)} misses")
    print("Ended")
