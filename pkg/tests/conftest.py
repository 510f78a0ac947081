import pathlib
import sys

# make the shared helpers importable regardless of pytest import mode
sys.path.insert(0, str(pathlib.Path(__file__).parent))
