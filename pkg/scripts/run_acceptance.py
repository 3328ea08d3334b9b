"""Run the acceptance criteria and print one PASS/FAIL line each."""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-s", "-q"],
        capture_output=True, text=True, cwd=ROOT,
    )
    lines = [line for line in proc.stdout.splitlines() if line.startswith("[criterion")]
    print("\n".join(lines))
    print(proc.stdout.strip().splitlines()[-1])
    sys.exit(proc.returncode)
