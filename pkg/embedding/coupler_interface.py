from abc import ABC, abstractmethod


# A coupler pairs a lattice law with a centered Gaussian of given variance

class Coupler(ABC):

    name = "abstract"

    @abstractmethod
    def couple(self, law, sigma2):
        """Return a CouplingMap pushing N(0, sigma2) forward onto law."""
        pass

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"
