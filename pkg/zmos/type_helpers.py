"""
Miscellaneous type aliases.
"""


import numpy as np
import numpy.typing as npt


class ArbitraryTypesConfig:
    """
    Pydantic configuration class that allows for arbitrary types.
    """

    arbitrary_types_allowed = True


FloatArray = npt.NDArray[np.float64]
"""
Real-valued numpy array.
"""
ComplexArray = npt.NDArray[np.complex128]
"""
Complex-valued numpy array.
"""
