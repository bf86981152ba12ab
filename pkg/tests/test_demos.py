import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"
SCRIPTS = sorted(p.name for p in DEMOS.glob("*.py") if not p.name.startswith("_"))


@pytest.mark.parametrize("script", SCRIPTS)
def test_demo_runs(script):
    out = subprocess.run([sys.executable, script], cwd=DEMOS, capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr
    assert "==" in out.stdout
