import json
import argparse

import pandas as pd


def calculate_acceptance_metrics(results_file):
    """Calculate pass rate, runtime per criterion and budget headroom"""

    with open(results_file, 'r') as f:
        data = json.load(f)

    results = data["results"]

    # 1. PASS RATE
    pass_rate = calculate_pass_rate(results)

    # 2. RUNTIME
    runtime_metrics = calculate_runtime_metrics(results)

    # Print Results
    print_metrics(pass_rate, runtime_metrics)

    return {
        "pass_rate": pass_rate,
        "runtime": runtime_metrics
    }


def calculate_pass_rate(results):
    """Passed criteria / total criteria, plus the names of failing ones"""
    passed = [r["name"] for r in results if r["passed"]]
    failed = [r["name"] for r in results if not r["passed"]]
    percentage = (len(passed) / len(results)) * 100 if results else 0

    return {
        "passed": len(passed),
        "total": len(results),
        "failed": failed,
        "pass_percentage": percentage
    }


def calculate_runtime_metrics(results):
    """Runtime per criterion against its budget"""
    frame = pd.DataFrame(
        [{"criterion": r["name"], "runtime": r["runtime"], "budget": r.get("budget")} for r in results]
    )
    frame["budget"] = pd.to_numeric(frame["budget"])
    frame["headroom"] = frame["budget"] - frame["runtime"]

    return {
        "total_runtime": float(frame["runtime"].sum()),
        "max_runtime": float(frame["runtime"].max()),
        "table": frame
    }


def print_metrics(pass_rate, runtime_metrics):
    """Print clean metrics output"""
    print("ACCEPTANCE METRICS")
    print("=" * 40)
    print(f"Pass rate: {pass_rate['pass_percentage']:.1f}% ({pass_rate['passed']}/{pass_rate['total']})")
    if pass_rate["failed"]:
        print(f"Failing: {', '.join(pass_rate['failed'])}")
    print(f"Total runtime: {runtime_metrics['total_runtime']:.2f} seconds")
    print()
    print(runtime_metrics["table"].to_string(index=False, na_rep="-", float_format=lambda x: f"{x:.2f}"))


def main():
    parser = argparse.ArgumentParser(description='Summarize acceptance experiment results')
    parser.add_argument('-r', '--report', required=True, help='Path to acceptance results JSON file')

    args = parser.parse_args()

    try:
        calculate_acceptance_metrics(args.report)
    except FileNotFoundError:
        print(f"Error: File '{args.report}' not found")
    except json.JSONDecodeError:
        print(f"Error: Invalid JSON format in '{args.report}'")
    except Exception as e:
        print(f"Error: {str(e)}")


if __name__ == "__main__":
    main()
