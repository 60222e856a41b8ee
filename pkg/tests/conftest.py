import sys
from pathlib import Path

# let the suite run from a fresh checkout without an editable install
src = Path(__file__).resolve().parents[1] / "src"
if str(src) not in sys.path:
    sys.path.insert(0, str(src))
