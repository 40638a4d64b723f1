"""Two-port nonreciprocal frequency converter"""

from modules.twoport.converter import TwoPortEffectiveParams, effective_two_port, smatrix_two_port
from modules.twoport.design import ConverterPoint, design_converter, optimal_converter_points, optimal_damping
