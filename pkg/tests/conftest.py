import sys
from pathlib import Path

# Make the shared helpers/strategies modules importable from any test file.
sys.path.insert(0, str(Path(__file__).parent))
