import datetime
import enum


class _Sentinel(enum.Enum):
    sentinel = object()


NOT_ENOUGH_DATA = _Sentinel.sentinel

STUDY_START = datetime.date(2010, 1, 1)
STUDY_CUTOFF = datetime.date(2014, 12, 31)
STUDY_END = datetime.date(2015, 12, 31)
RECENCY_DAYS = 365
DAYS_PER_YEAR = 365.25

PR_THRESHOLD = 1.0
PAGERANK_SCALE = 10
PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-8
PAGERANK_MAX_ITER = 200
MAX_NEIGHBORHOOD_DEGREE = 3

AGE_CONSTANT = 7
AGE_DIVISOR = 10
AGE_BANDS = (
    ("13-17", 13, 17),
    ("18-24", 18, 24),
    ("25-30", 25, 30),
    ("31-40", 31, 40),
    ("41-50", 41, 50),
    ("51-60", 51, 60),
    ("61+", 61, None),
)

ACTIVE_TIER_SIZE = 1379
NON_ACTIVE_TIER_SIZE = 1836

COLLINEARITY_WARN_R = 0.5
COLLINEARITY_FLAG_R = 0.7
LOGIT_TOL = 1e-8
LOGIT_MAX_ITER = 100
SEPARATION_NORM = 1e3

EVENT_HEADER = ("event_id", "event_type", "date", "crime_flags", "participants")
CIRV_HEADER = ("name", "dob", "status")
GROUND_TRUTH_HEADER = ("person_id", "name", "dob", "planted_risk")

# One file per dataset; the shooting and CIRV files may be given explicitly.
DATASET_FILES = {
    "offense": "offenses.csv",
    "victimization": "suspects_victims.csv",
    "arrest": "arrests.csv",
    "field_interview": "field_interviews.csv",
    "shooting": "shootings.csv",
}
CIRV_FILE = "cirv.csv"
GROUND_TRUTH_FILE = "ground_truth.csv"

FLAG_SEPARATOR = "|"
SCORE_QUANTUM = "0.0001"
DEFAULT_RULESET = "default.yaml"
READ_SIZE = 65536
