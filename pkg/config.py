# config.py - Default settings and logging setup (no environment variables)
import logging

# Output
DEFAULT_OUTPUT_DIR = "results"
REPORT_FILE = "report.jsonl"
ROUNDS_CSV_FILE = "rounds.csv"
OVERHEAD_FILE = "overhead.json"
QTABLES_DIR = "qtables"
SWEEP_DIR = "sweep"
SWEEP_RESULT_FILE = "sweep_result.json"
COMPARISON_CSV_FILE = "comparison.csv"
COMPARISON_JSON_FILE = "comparison.json"

# Scenario defaults
DEFAULT_SEED = 0
DEFAULT_MAX_ROUNDS = 100
DEFAULT_N_CLASSES = 10
DEFAULT_N_SAMPLES = 4000
DEFAULT_FEATURE_DIM = 16
DEFAULT_TEST_FRACTION = 0.2
DEFAULT_LEARNING_RATE = 0.05
DEFAULT_REFERENCE_EPOCHS = 20
DEFAULT_REFERENCE_BATCH = 32
DIRICHLET_CONCENTRATION = 0.1

# Convergence criterion
DEFAULT_CONVERGENCE_DELTA = 1.0  # accuracy points
DEFAULT_CONVERGENCE_WINDOW = 5  # rounds
DEFAULT_LOSS_TOL = 0.01  # relative

# Grid search
DEFAULT_SWEEP_BUDGET = 30

# Adaptive strategies pick K up to this value
MIN_ADAPTIVE_FLEET = 20

LOG_LEVEL = "INFO"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = LOG_LEVEL) -> None:
    """Configure the root logger once; log output goes to stderr"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
    )
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))
