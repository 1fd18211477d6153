import numpy
import scipy
import sympy

from speclab.generators import counterexample
from speclab.spectral_core import eigenvalues


def test_environment():
    print("Testing environment setup:")
    print(f"numpy {numpy.__version__}, scipy {scipy.__version__}, sympy {sympy.__version__}")

    moduli = abs(eigenvalues(counterexample("ce3-X", 8)))
    assert numpy.allclose(moduli, 1.0)
    print("Dense eigenvalue solver returned the unit circle")

    return "Environment setup complete!"


if __name__ == "__main__":
    print(test_environment())
