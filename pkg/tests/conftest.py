import numpy as np
import pytest

from symadit import default_catalog
from symadit.crystal import CrystalASU, Site


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture
def nacl(catalog):
    """Rock salt: group 225, Na at 4a (0,0,0), Cl at 4b (1/2,1/2,1/2)."""
    return CrystalASU(
        spacegroup=225,
        sites=[
            Site(element=11, wyckoff="a", frac=np.zeros(3)),
            Site(element=17, wyckoff="b", frac=np.array([0.5, 0.5, 0.5])),
        ],
        lattice=np.array([5.65, 5.65, 5.65, 90.0, 90.0, 90.0]),
    )


def random_asu(catalog, group: int, rng: np.random.Generator,
               max_sites: int = 4, min_length: float = 4.0,
               max_length: float = 9.0) -> CrystalASU:
    """Random valid asymmetric unit in the given group (generic parameters)."""
    from symadit import symcat

    entry = catalog.group(group)
    lc = entry.lattice_class
    ell = np.empty(6)
    ell[:3] = rng.uniform(min_length, max_length, size=3)
    ell[3:] = rng.uniform(70.0, 110.0, size=3)
    ell = symcat.symmetrize_lattice(lc, ell)

    n_sites = int(rng.integers(1, max_sites + 1))
    sites = []
    used_zero_dof = set()
    positions = list(entry.wyckoff)
    for _ in range(n_sites):
        w = positions[int(rng.integers(0, len(positions)))]
        if w.dof == 0:
            if w.letter in used_zero_dof:
                continue
            used_zero_dof.add(w.letter)
        f = symcat.symmetrize_site(w, rng.uniform(0.05, 0.95, size=3))
        sites.append(Site(element=int(rng.integers(1, 101)),
                          wyckoff=w.letter, frac=f))
    if not sites:
        w = entry.wyckoff[-1]
        f = symcat.symmetrize_site(w, rng.uniform(0.05, 0.95, size=3))
        sites = [Site(element=int(rng.integers(1, 101)),
                      wyckoff=w.letter, frac=f)]
    return CrystalASU(spacegroup=group, sites=sites, lattice=ell)
