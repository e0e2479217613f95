"""Raw and standardized datasets and the scale factors linking them."""

import numpy as np
import pandas as pd
from sklearn.utils import check_array, check_consistent_length


class ZeroVarianceError(ValueError):
    """A predictor or response column has zero standard deviation."""


class RawDataset():
    '''
    n points of predictors x in R^d and a scalar response y, in raw units.

    Parameters
    ----------
    x : array-like, shape (n, d)
        Predictor vectors. A 1-d array is treated as a single predictor.
    y : array-like, shape (n,)
        Response values.
    x_names : list of str, default=None
        Column names for x. Defaults to x0, x1, ...
    y_name : str, default="y"
        Name of the response column.
    '''
    def __init__(self, x, y, x_names=None, y_name="y"):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        self.x = check_array(x, dtype=np.float64, ensure_min_samples=2, copy=True)
        self.y = check_array(np.asarray(y, dtype=float).reshape(-1, 1), dtype=np.float64,
                             ensure_min_samples=2, copy=True).ravel()
        check_consistent_length(self.x, self.y)
        if x_names is None:
            x_names = [f"x{k}" for k in range(self.x.shape[1])]
        if len(x_names) != self.x.shape[1]:
            raise ValueError(f"got {len(x_names)} x_names for {self.x.shape[1]} predictor columns")
        self.x_names = [str(name) for name in x_names]
        self.y_name = str(y_name)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @classmethod
    def from_frame(cls, frame, y_col=None):
        '''
        Build from a DataFrame. y_col is a column name or integer position;
        None selects the last column. Every other column becomes a predictor.
        '''
        if y_col is None:
            y_col = frame.columns[-1]
        elif isinstance(y_col, (int, np.integer)) and y_col not in frame.columns:
            y_col = frame.columns[y_col]
        if y_col not in frame.columns:
            raise ValueError(f"y column {y_col!r} not found in {list(frame.columns)}")
        x_frame = frame.drop(columns=[y_col])
        if x_frame.shape[1] == 0:
            raise ValueError("at least one predictor column is required besides the y column")
        return cls(x_frame.to_numpy(dtype=float), frame[y_col].to_numpy(dtype=float),
                   x_names=list(x_frame.columns), y_name=y_col)

    def to_frame(self):
        frame = pd.DataFrame(self.x, columns=self.x_names)
        frame[self.y_name] = self.y
        return frame

    def subset(self, index):
        return RawDataset(self.x[index], self.y[index], x_names=self.x_names, y_name=self.y_name)


class StandardizedDataset():
    '''
    A RawDataset with every column divided by its sample standard deviation (ddof=1).

    Attributes
    ----------
    x_s : np.ndarray, shape (n, d)
    y_s : np.ndarray, shape (n,)
    sigma_x : np.ndarray, shape (d,)
    sigma_y : float
    raw : RawDataset
        The dataset the scale factors were computed from.
    '''
    def __init__(self, x_s, y_s, sigma_x, sigma_y, raw=None):
        self.x_s = x_s
        self.y_s = y_s
        self.sigma_x = sigma_x
        self.sigma_y = sigma_y
        self.raw = raw
        self.x_s.setflags(write=False)
        self.y_s.setflags(write=False)
        self.sigma_x.setflags(write=False)

    @property
    def n(self):
        return self.x_s.shape[0]

    @property
    def d(self):
        return self.x_s.shape[1]

    @property
    def joint(self):
        '''Standardized (x, y) points with y as the last coordinate.'''
        return np.column_stack([self.x_s, self.y_s])

    def scale_x(self, x):
        '''Raw predictor query (d,) or (k, d) to standardized units.'''
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"query has {x.shape[-1]} predictor columns, model was fitted on {self.d}")
        return x / self.sigma_x

    def scale_y(self, y):
        return np.asarray(y, dtype=float) / self.sigma_y

    def unscale_x(self, x_s):
        return np.asarray(x_s, dtype=float) * self.sigma_x

    def unscale_y(self, y_s):
        return np.asarray(y_s, dtype=float) * self.sigma_y

    def fingerprint(self):
        '''n, d and per-column standard deviations, as recorded in run manifests.'''
        return {
            "n": int(self.n),
            "d": int(self.d),
            "sigma_x": [float(s) for s in self.sigma_x],
            "sigma_y": float(self.sigma_y),
        }


def standardize(raw):
    '''
    Divide each predictor column and the response by its sample standard deviation.

    Parameters
    ----------
    raw : RawDataset

    Returns
    -------
    StandardizedDataset

    Raises
    ------
    ZeroVarianceError
        If any column is constant; the message names the column.
    '''
    sigma_x = raw.x.std(axis=0, ddof=1)
    sigma_y = float(raw.y.std(ddof=1))
    for name, sigma in zip(raw.x_names, sigma_x):
        if not sigma > 0:
            raise ZeroVarianceError(f"column {name!r} has zero variance; constant predictors cannot be scaled")
    if not sigma_y > 0:
        raise ZeroVarianceError(f"column {raw.y_name!r} has zero variance; constant responses cannot be scaled")
    return StandardizedDataset(raw.x / sigma_x, raw.y / sigma_y, sigma_x, sigma_y, raw=raw)
