import sys
from pathlib import Path

ADAPTER_SRC = Path(__file__).resolve().parent.parent / "src"
if str(ADAPTER_SRC) not in sys.path:
    sys.path.insert(0, str(ADAPTER_SRC))

# the primary pipeline lives one level up; its CLI is the conformance target
REPO_ROOT = Path(__file__).resolve().parent.parent.parent
PRIMARY_SRC = REPO_ROOT / "src"
