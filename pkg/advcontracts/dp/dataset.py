import json
import os

import numpy as np
import pandas as pd

from ..exceptions import UnknownColumn


class Dataset:
    """Numeric records with public bounds on every column.

    Args:
        frame (DataFrame): One row per record.
        bounds (dict): Column name to (lower, upper) bounds.

    Examples:
        >>> import pandas as pd
        >>> ds = Dataset(pd.DataFrame({'age': [30, 40]}), {'age': (0, 100)})
        >>> ds.size, ds.bounds['age']
        (2, (0.0, 100.0))
    """

    def __init__(self, frame, bounds):
        assert isinstance(frame, pd.DataFrame), 'records must be a data frame'
        assert not frame.empty, 'dataset must not be empty'
        missing = set(frame.columns) - set(bounds)
        assert not missing, 'missing bounds for columns: %s' % ', '.join(sorted(map(str, missing)))

        self.bounds = {}
        for column in frame.columns:
            lower, upper = map(float, bounds[column])
            assert lower <= upper, 'bounds of %s must be ordered' % column
            values = frame[column].to_numpy(dtype=float)
            info = 'values of %s must be within [%g, %g]' % (column, lower, upper)
            assert np.all((values >= lower) & (values <= upper)), info
            self.bounds[column] = (lower, upper)

        self.frame = frame.astype('float64')

    @property
    def size(self):
        """Public number of records."""
        return len(self.frame)

    @property
    def columns(self):
        return list(self.frame.columns)

    def column(self, name):
        """Returns the values and bounds of a column."""
        if name not in self.bounds: raise UnknownColumn(name)
        return self.frame[name].to_numpy(), self.bounds[name]

    def drop_row(self, index=-1):
        """Returns the neighbouring dataset without one record."""
        frame = self.frame.drop(self.frame.index[index])
        return Dataset(frame.reset_index(drop=True), self.bounds)

    def __repr__(self):
        return 'Dataset(%d rows, columns=%s)' % (self.size, self.columns)


def default_bounds_path(path):
    """Bounds sidecar next to a data file, 'name_bounds.json' for 'name.csv'."""
    return os.path.splitext(path)[0] + '_bounds.json'


def read_dataset(path, bounds_path=None):
    """Reads a dataset from delimited text and its JSON bounds sidecar.

    Args:
        path (str): Location of the records, with a header row.
        bounds_path (str): Location of the bounds, a JSON object mapping each column to [lower, upper].
            Defaults to the file next to the records with the suffix '_bounds.json'.

    Returns:
        dataset (Dataset): The bounded dataset.
    """
    frame = pd.read_csv(path, sep=None, engine='python')
    with open(bounds_path or default_bounds_path(path), 'r') as file:
        bounds = json.load(file)

    return Dataset(frame, bounds)
