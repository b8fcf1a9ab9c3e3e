from typing import List, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import sparse

SpectralParameter = Union[complex, float]

InteriorVector = npt.NDArray[np.generic]
BoundaryVector = npt.NDArray[np.generic]
BoundaryMatrix = npt.NDArray[np.generic]
MatrixLike = Union[npt.NDArray[np.generic], sparse.spmatrix]

DecaySamples = List[Tuple[float, float]]
