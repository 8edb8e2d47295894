"""
Figures rendered from results CSVs. The CSV is the record; a figure can
always be redrawn from it.
"""
import logging
from pathlib import Path

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from feedback.presets import FEEDBACK_PRESETS  # noqa: E402
from trainer.evaluation import RESULT_COLUMNS  # noqa: E402
from .sweeps import FEEDBACK_AXIS, POWER_AXIS  # noqa: E402

logger = logging.getLogger(__name__)

VECTOR_FORMATS = ('.svg', '.pdf', '.eps')

METHOD_LABELS = {
    'gnn': 'GNN',
    'mlp': 'MLP',
    'mo_pcsi': 'MO, perfect CSI',
    'mo_omp': 'MO, OMP estimate',
    'fully_digital': 'Fully digital, perfect CSI',
}
MARKERS = {'gnn': 'o', 'mlp': 's', 'mo_pcsi': '^', 'mo_omp': 'v', 'fully_digital': None}
AXIS_LABELS = {
    POWER_AXIS: 'Transmit power (dBm)',
    FEEDBACK_AXIS: 'Feedback bits B',
}


class EmptyResultsError(ValueError):
    pass


def read_results(path):
    try:
        table = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise EmptyResultsError(f"{path} is empty")
    missing = [column for column in RESULT_COLUMNS if column not in table.columns]
    if missing:
        raise EmptyResultsError(f"{path} lacks column(s) {', '.join(missing)}")
    if table.empty:
        raise EmptyResultsError(f"{path} holds no results")
    return table


def guess_axis(table):
    values = set(table['axis_value'])
    return FEEDBACK_AXIS if values <= set(FEEDBACK_PRESETS) else POWER_AXIS


def plot_results(csv_path, output=None, axis=None):
    """Mean SE with standard-error bars, one line per method; returns the figure path."""
    csv_path = Path(csv_path)
    output = Path(output) if output else csv_path.with_suffix('.svg')
    if output.suffix not in VECTOR_FORMATS:
        raise ValueError(f"Figures are written as {', '.join(VECTOR_FORMATS)}, not {output.suffix or 'no suffix'}")

    table = read_results(csv_path)
    axis = axis or guess_axis(table)

    fig, ax = plt.subplots(figsize=(7, 5))
    for method, rows in table.groupby('method', sort=False):
        rows = rows.sort_values('axis_value')
        if method == 'fully_digital':
            style = dict(color='black', linestyle='-')
        else:
            style = dict(marker=MARKERS.get(method, 'o'), linestyle='-')
        ax.errorbar(rows['axis_value'], rows['mean_se'], yerr=rows['stderr'], capsize=3,
                    label=METHOD_LABELS.get(method, method), **style)

    if axis == FEEDBACK_AXIS:
        ax.set_xscale('log', base=2)
        ticks = sorted(set(table['axis_value']))
        ax.set_xticks(ticks, labels=[f"{value:g}" for value in ticks])
        ax.minorticks_off()
    ax.set_xlabel(AXIS_LABELS[axis])
    ax.set_ylabel('Spectral efficiency (bit/s/Hz)')
    ax.grid(True, which='both')
    ax.legend()

    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, bbox_inches='tight')
    plt.close(fig)
    logger.info("Figure written to %s", output)
    return output
