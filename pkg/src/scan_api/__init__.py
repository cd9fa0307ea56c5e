from .four_line_profile import FourLineProfile
from .n_line_profile import NLineProfile
from .profile_abc import WeightProfile
from .profiles import PROFILES, profile_for
from .records import COLUMNS, ScanRecord, read_records, write_csv, write_jsonl, write_manifest
from .scan_api import (
    GenericExample,
    ParameterPath,
    PersistenceSeries,
    ScanAPI,
    dihedral_sweep,
    expected_dihedral_definite,
    find_generic_example,
    is_excluded,
    persistence_path,
    replay_defect,
    scan_grid,
)

__all__ = [
    "FourLineProfile",
    "NLineProfile",
    "WeightProfile",
    "PROFILES",
    "profile_for",
    "COLUMNS",
    "ScanRecord",
    "read_records",
    "write_csv",
    "write_jsonl",
    "write_manifest",
    "GenericExample",
    "ParameterPath",
    "PersistenceSeries",
    "ScanAPI",
    "dihedral_sweep",
    "expected_dihedral_definite",
    "find_generic_example",
    "is_excluded",
    "persistence_path",
    "replay_defect",
    "scan_grid",
]
