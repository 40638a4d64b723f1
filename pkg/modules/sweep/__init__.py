"""Grid sweeps and the figure dataset catalog"""

from modules.sweep.backends import BACKENDS, evaluate
from modules.sweep.figures import FIGURE_IDS, reproduce_figure
from modules.sweep.grid import (
    SweepRecord,
    SweepRunner,
    SweepSpec,
    audited_records,
    conservation_audit,
    flow_columns,
    resolve_threads,
    run_sweep,
)
