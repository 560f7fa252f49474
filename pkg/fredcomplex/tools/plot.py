"""Line plots of experiment data rendered to SVG text."""

import io

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def line_plot(x, series, title='', xlabel='', ylabel='', markers=False):
    """Render one or more y-series over a shared x-axis.

    :param x: abscissa values
    :param series: dict label -> ordinate values (same length as x)
    :param str title: plot title
    :param str xlabel: x-axis label
    :param str ylabel: y-axis label
    :param bool markers: draw a dot at every sample

    :return str: SVG document
    """
    x = np.asarray(x, dtype=float)
    for label, y in series.items():
        if np.shape(y) != x.shape:
            raise ValueError('series {} has {} values, expected {}'.format(
                label, np.size(y), x.size))

    # fixed ids keep repeated runs byte-identical
    with plt.rc_context({'svg.hashsalt': 'fredcomplex'}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, y in series.items():
            ax.plot(x, np.asarray(y, dtype=float), label=label,
                    marker='o' if markers else None, markersize=3)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()

        buf = io.StringIO()
        fig.savefig(buf, format='svg', metadata={'Date': None})
        plt.close(fig)

    return buf.getvalue()
